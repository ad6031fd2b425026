#include "stublint/c_preprocess.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

namespace stublint {

namespace {

// Replaces comment text by spaces, keeping newlines and column positions.
std::string strip_comments(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    while (i < out.size()) {
        char c = out[i];
        if (c == '"' || c == '\'') {
            char q = c;
            ++i;
            while (i < out.size() && out[i] != q && out[i] != '\n') {
                if (out[i] == '\\' && i + 1 < out.size()) {
                    ++i;
                }
                ++i;
            }
            ++i;
        } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
            while (i < out.size() && out[i] != '\n') {
                // A backslash at end of line continues a line comment.
                if (out[i] == '\\' && i + 1 < out.size() && out[i + 1] == '\n') {
                    out[i] = ' ';
                    i += 2;
                    continue;
                }
                out[i++] = ' ';
            }
        } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '*') {
            out[i++] = ' ';
            out[i++] = ' ';
            while (i < out.size() && !(out[i] == '*' && i + 1 < out.size() && out[i + 1] == '/')) {
                if (out[i] != '\n') {
                    out[i] = ' ';
                }
                ++i;
            }
            if (i < out.size()) {
                out[i++] = ' ';
                out[i++] = ' ';
            }
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') {
            l.pop_back();
        }
    }
    return lines;
}

bool ends_with_continuation(const std::string& line) {
    std::size_t end = line.find_last_not_of(" \t");
    return end != std::string::npos && line[end] == '\\';
}

struct MacroEvent {
    int line = 0;
    bool is_define = false;
    MacroDef def;
    std::string undef_name;
};

struct CondFrame {
    bool parent_active = true;
    bool active = true;
    bool taken = false;
};

// Evaluates `#if` expressions. Identifiers that are not object-like local
// macros evaluate to 0, as the C preprocessor does for undefined names.
class CondEvaluator {
public:
    CondEvaluator(const std::vector<Token>& toks, const std::map<std::string, MacroDef>& macros)
        : toks_(toks), macros_(macros) {}

    long long evaluate() {
        long long v = ternary();
        return v;
    }

    bool used_unknown_name() const { return unknown_; }
    const std::string& unknown_name() const { return unknown_name_; }

private:
    const std::vector<Token>& toks_;
    const std::map<std::string, MacroDef>& macros_;
    std::size_t pos_ = 0;
    bool unknown_ = false;
    std::string unknown_name_;

    const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    bool accept(std::string_view p) {
        if (cur().kind == TokKind::Punct && cur().text == p) {
            ++pos_;
            return true;
        }
        return false;
    }
    void note_unknown(const std::string& name) {
        if (!unknown_) {
            unknown_ = true;
            unknown_name_ = name;
        }
    }

    long long ternary() {
        long long c = binary(0);
        if (accept("?")) {
            long long a = ternary();
            accept(":");
            long long b = ternary();
            return c != 0 ? a : b;
        }
        return c;
    }

    static int precedence(const std::string& op) {
        static const std::map<std::string, int> table{
            {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5}, {"==", 6}, {"!=", 6},
            {"<", 7}, {">", 7}, {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8},
            {"+", 9}, {"-", 9}, {"*", 10}, {"/", 10}, {"%", 10},
        };
        auto it = table.find(op);
        return it == table.end() ? -1 : it->second;
    }

    long long binary(int min_prec) {
        long long lhs = unary();
        while (cur().kind == TokKind::Punct) {
            std::string op = cur().text;
            int prec = precedence(op);
            if (prec < 0 || prec <= min_prec - 1 || prec < min_prec) {
                break;
            }
            ++pos_;
            long long rhs = binary(prec + 1);
            lhs = apply(op, lhs, rhs);
        }
        return lhs;
    }

    static long long apply(const std::string& op, long long a, long long b) {
        if (op == "||") return (a != 0 || b != 0) ? 1 : 0;
        if (op == "&&") return (a != 0 && b != 0) ? 1 : 0;
        if (op == "|") return a | b;
        if (op == "^") return a ^ b;
        if (op == "&") return a & b;
        if (op == "==") return a == b ? 1 : 0;
        if (op == "!=") return a != b ? 1 : 0;
        if (op == "<") return a < b ? 1 : 0;
        if (op == ">") return a > b ? 1 : 0;
        if (op == "<=") return a <= b ? 1 : 0;
        if (op == ">=") return a >= b ? 1 : 0;
        if (op == "<<") return static_cast<long long>(static_cast<unsigned long long>(a) << (b & 63));
        if (op == ">>") return a >> (b & 63);
        if (op == "+") return a + b;
        if (op == "-") return a - b;
        if (op == "*") return a * b;
        if (op == "/") return b == 0 ? 0 : a / b;
        if (op == "%") return b == 0 ? 0 : a % b;
        return 0;
    }

    long long unary() {
        if (accept("!")) return unary() == 0 ? 1 : 0;
        if (accept("-")) return -unary();
        if (accept("+")) return unary();
        if (accept("~")) return ~unary();
        if (accept("(")) {
            long long v = ternary();
            accept(")");
            return v;
        }
        const Token& t = cur();
        if (t.kind == TokKind::Number) {
            ++pos_;
            try {
                return static_cast<long long>(std::stoull(t.text, nullptr, 0));
            } catch (...) {
                return 0;
            }
        }
        if (t.kind == TokKind::Ident) {
            ++pos_;
            if (t.text == "defined") {
                bool paren = accept("(");
                std::string name = cur().text;
                ++pos_;
                if (paren) {
                    accept(")");
                }
                if (macros_.count(name) != 0) {
                    return 1;
                }
                note_unknown(name);
                return 0;
            }
            // Function-like use of an unknown macro: skip its arguments.
            if (cur().is("(")) {
                int depth = 0;
                do {
                    if (cur().is("(")) ++depth;
                    if (cur().is(")")) --depth;
                    ++pos_;
                } while (depth > 0 && cur().kind != TokKind::Eof);
                note_unknown(t.text);
                return 0;
            }
            auto it = macros_.find(t.text);
            if (it != macros_.end() && !it->second.function_like && it->second.body.size() == 1
                && it->second.body[0].kind == TokKind::Number) {
                try {
                    return static_cast<long long>(std::stoull(it->second.body[0].text, nullptr, 0));
                } catch (...) {
                    return 0;
                }
            }
            if (it == macros_.end()) {
                note_unknown(t.text);
            }
            return 0;
        }
        ++pos_;
        return 0;
    }
};

MacroDef parse_define(const std::vector<Token>& toks, int line) {
    // toks: '#', 'define', NAME, ...
    if (toks.size() < 4 || toks[2].kind != TokKind::Ident) {
        throw CParseError(line, 1, "malformed #define");
    }
    MacroDef def;
    def.name = toks[2].text;
    def.line = line;
    std::size_t i = 3;
    const Token& name = toks[2];
    if (toks[i].is("(") && toks[i].line == name.line
        && toks[i].column == name.column + static_cast<int>(name.text.size())) {
        def.function_like = true;
        ++i;
        while (!toks[i].is(")")) {
            if (toks[i].kind == TokKind::Eof) {
                throw CParseError(line, 1, "malformed parameter list in #define " + def.name);
            }
            if (toks[i].is("...")) {
                def.variadic = true;
            } else if (toks[i].kind == TokKind::Ident) {
                def.params.push_back(toks[i].text);
            }
            ++i;
        }
        ++i;
    }
    for (; i < toks.size() && toks[i].kind != TokKind::Eof; ++i) {
        def.body.push_back(toks[i]);
    }
    return def;
}

std::string tokens_to_string(const std::vector<Token>& toks) {
    std::string s;
    for (const auto& t : toks) {
        if (!s.empty()) {
            s += ' ';
        }
        s += t.text;
    }
    return s;
}

std::string stringify(const std::vector<Token>& toks) {
    std::string s = "\"";
    for (char c : tokens_to_string(toks)) {
        if (c == '"' || c == '\\') {
            s += '\\';
        }
        s += c;
    }
    s += '"';
    return s;
}

class Expander {
public:
    Expander(std::vector<Token> toks, std::vector<MacroEvent> events, std::vector<Diagnostic>& notes,
             std::string_view file)
        : toks_(std::move(toks)), events_(std::move(events)), notes_(notes), file_(file) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t ev = 0;
        std::size_t i = 0;
        while (i < toks_.size()) {
            const Token& t = toks_[i];
            while (ev < events_.size() && events_[ev].line < t.line) {
                apply(events_[ev++]);
            }
            if (t.kind != TokKind::Ident) {
                out.push_back(t);
                ++i;
                continue;
            }
            auto it = current_.find(t.text);
            if (it == current_.end()) {
                out.push_back(t);
                ++i;
                continue;
            }
            const MacroDef& def = it->second;
            if (!def.function_like) {
                append_relocated(out, def.body, t);
                ++i;
                continue;
            }
            std::vector<std::vector<Token>> args;
            std::size_t end = 0;
            if (!collect_args(i + 1, args, end)) {
                out.push_back(t);
                ++i;
                continue;
            }
            if (def.params.empty() && !def.variadic && args.size() == 1 && args[0].empty()) {
                args.clear();
            }
            if (args.size() < def.params.size() || (!def.variadic && args.size() > def.params.size())) {
                notes_.push_back(make_diag(RuleId::Note, Severity::Note,
                                           SourceLoc{std::string(file_), t.line, t.column},
                                           "macro '" + def.name + "' used with "
                                               + std::to_string(args.size())
                                               + " arguments; left unexpanded"));
                out.push_back(t);
                ++i;
                continue;
            }
            append_relocated(out, substitute(def, args), t);
            i = end + 1;
        }
        return out;
    }

private:
    std::vector<Token> toks_;
    std::vector<MacroEvent> events_;
    std::vector<Diagnostic>& notes_;
    std::string_view file_;
    std::map<std::string, MacroDef> current_;

    void apply(const MacroEvent& e) {
        if (e.is_define) {
            current_[e.def.name] = e.def;
        } else {
            current_.erase(e.undef_name);
        }
    }

    bool collect_args(std::size_t open, std::vector<std::vector<Token>>& args, std::size_t& end) {
        if (open >= toks_.size() || !toks_[open].is("(")) {
            return false;
        }
        args.emplace_back();
        int depth = 0;
        for (std::size_t k = open; k < toks_.size(); ++k) {
            const Token& t = toks_[k];
            if (t.kind == TokKind::Eof) {
                return false;
            }
            if (t.is("(") || t.is("[") || t.is("{")) {
                if (depth++ == 0) {
                    continue;
                }
            } else if (t.is(")") || t.is("]") || t.is("}")) {
                if (--depth == 0) {
                    end = k;
                    return true;
                }
            } else if (depth == 1 && t.is(",")) {
                args.emplace_back();
                continue;
            }
            args.back().push_back(t);
        }
        return false;
    }

    static std::vector<Token> substitute(const MacroDef& def,
                                         const std::vector<std::vector<Token>>& args) {
        auto param_index = [&](const Token& t) -> std::optional<std::size_t> {
            if (t.kind != TokKind::Ident) {
                return std::nullopt;
            }
            for (std::size_t p = 0; p < def.params.size(); ++p) {
                if (def.params[p] == t.text) {
                    return p;
                }
            }
            return std::nullopt;
        };
        auto variadic_args = [&]() {
            std::vector<Token> v;
            for (std::size_t a = def.params.size(); a < args.size(); ++a) {
                if (a > def.params.size()) {
                    Token comma;
                    comma.kind = TokKind::Punct;
                    comma.text = ",";
                    v.push_back(comma);
                }
                v.insert(v.end(), args[a].begin(), args[a].end());
            }
            return v;
        };

        std::vector<Token> out;
        for (std::size_t k = 0; k < def.body.size(); ++k) {
            const Token& t = def.body[k];
            if (t.is("#") && k + 1 < def.body.size()) {
                if (auto p = param_index(def.body[k + 1])) {
                    Token s;
                    s.kind = TokKind::String;
                    s.text = stringify(args[*p]);
                    out.push_back(s);
                    ++k;
                    continue;
                }
            }
            if (auto p = param_index(t)) {
                out.insert(out.end(), args[*p].begin(), args[*p].end());
            } else if (def.variadic && t.kind == TokKind::Ident && t.text == "__VA_ARGS__") {
                auto v = variadic_args();
                out.insert(out.end(), v.begin(), v.end());
            } else {
                out.push_back(t);
            }
        }

        // Token pasting.
        std::vector<Token> pasted;
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (out[k].is("##") && !pasted.empty() && k + 1 < out.size()) {
                std::string joined = pasted.back().text + out[k + 1].text;
                auto relexed = lex_c(joined);
                if (!relexed.empty() && relexed[0].kind != TokKind::Eof) {
                    pasted.back().kind = relexed[0].kind;
                    pasted.back().text = relexed[0].text;
                }
                ++k;
                continue;
            }
            pasted.push_back(out[k]);
        }
        return pasted;
    }

    static void append_relocated(std::vector<Token>& out, const std::vector<Token>& body,
                                 const Token& use) {
        for (Token t : body) {
            t.line = use.line;
            t.column = use.column;
            out.push_back(std::move(t));
        }
    }
};

void reject_macro_cycles(const std::map<std::string, MacroDef>& macros) {
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> marks;
    std::function<void(const MacroDef&)> visit = [&](const MacroDef& def) {
        marks[def.name] = Mark::Active;
        for (const auto& t : def.body) {
            if (t.kind != TokKind::Ident) {
                continue;
            }
            auto it = macros.find(t.text);
            if (it == macros.end()) {
                continue;
            }
            if (def.function_like
                && std::find(def.params.begin(), def.params.end(), t.text) != def.params.end()) {
                continue;
            }
            Mark m = marks[t.text];
            if (m == Mark::Active) {
                throw CParseError(it->second.line, 1, "recursive macro '" + t.text + "'");
            }
            if (m == Mark::None) {
                visit(it->second);
            }
        }
        marks[def.name] = Mark::Done;
    };
    for (const auto& [name, def] : macros) {
        if (marks[name] == Mark::None) {
            visit(def);
        }
    }
}

} // namespace

std::string PreprocessResult::text() const {
    std::string out;
    int line = 1;
    bool line_start = true;
    for (const auto& t : tokens) {
        if (t.kind == TokKind::Eof) {
            break;
        }
        while (line < t.line) {
            out += '\n';
            ++line;
            line_start = true;
        }
        if (!line_start) {
            out += ' ';
        }
        out += t.text;
        line_start = false;
    }
    if (!out.empty()) {
        out += '\n';
    }
    return out;
}

PreprocessResult preprocess_local(std::string_view source, std::string_view file) {
    PreprocessResult res;
    std::vector<std::string> lines = split_lines(strip_comments(source));
    std::vector<std::string> cleaned(lines.size());
    std::vector<MacroEvent> events;
    std::vector<CondFrame> conds;
    std::map<std::string, MacroDef> current;

    auto active = [&]() { return conds.empty() || conds.back().active; };
    auto note = [&](int line, std::string msg) {
        res.notes.push_back(make_diag(RuleId::Note, Severity::Note,
                                      SourceLoc{std::string(file), line, 1}, std::move(msg)));
    };
    // Returns whether the guard holds, noting guards that name macros not
    // defined in this file.
    auto eval_guard = [&](const std::vector<Token>& toks, std::size_t from, int line) {
        std::vector<Token> expr(toks.begin() + static_cast<std::ptrdiff_t>(from), toks.end());
        if (expr.empty() || expr.back().kind != TokKind::Eof) {
            Token eof;
            expr.push_back(eof);
        }
        CondEvaluator ev(expr, current);
        bool holds = ev.evaluate() != 0;
        if (ev.used_unknown_name()) {
            note(line, "conditional guard '" + ev.unknown_name()
                           + "' is not defined in this file; analyzing the branch taken when it is "
                             "undefined");
        }
        return holds;
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& raw = lines[i];
        std::size_t first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] != '#') {
            cleaned[i] = active() ? raw : std::string();
            continue;
        }

        int line_no = static_cast<int>(i) + 1;
        std::string directive = raw;
        std::size_t j = i;
        while (ends_with_continuation(lines[j])) {
            if (j + 1 >= lines.size()) {
                throw CParseError(line_no, 1, "unterminated #define continuation");
            }
            ++j;
            directive += '\n';
            directive += lines[j];
        }
        i = j;

        std::vector<Token> toks = lex_c(directive, line_no, 1);
        if (toks.size() < 2 || toks[1].kind != TokKind::Ident) {
            continue; // null directive or `# 12 "file"` line marker
        }
        const std::string& kw = toks[1].text;

        if (kw == "if" || kw == "ifdef" || kw == "ifndef") {
            CondFrame f;
            f.parent_active = active();
            bool holds = false;
            if (f.parent_active) {
                if (kw == "if") {
                    holds = eval_guard(toks, 2, line_no);
                } else {
                    std::string name = toks.size() > 2 ? toks[2].text : "";
                    bool defined = current.count(name) != 0;
                    if (!defined) {
                        note(line_no, "conditional guard '" + name
                                          + "' is not defined in this file; analyzing the branch "
                                            "taken when it is undefined");
                    }
                    holds = kw == "ifdef" ? defined : !defined;
                }
            }
            f.active = f.parent_active && holds;
            f.taken = f.active;
            conds.push_back(f);
            continue;
        }
        if (kw == "elif") {
            if (conds.empty()) {
                note(line_no, "#elif without #if");
                continue;
            }
            CondFrame& f = conds.back();
            if (f.taken || !f.parent_active) {
                f.active = false;
            } else {
                f.active = eval_guard(toks, 2, line_no);
                f.taken = f.active;
            }
            continue;
        }
        if (kw == "else") {
            if (conds.empty()) {
                note(line_no, "#else without #if");
                continue;
            }
            CondFrame& f = conds.back();
            f.active = f.parent_active && !f.taken;
            f.taken = true;
            continue;
        }
        if (kw == "endif") {
            if (conds.empty()) {
                note(line_no, "#endif without #if");
            } else {
                conds.pop_back();
            }
            continue;
        }
        if (!active()) {
            continue;
        }
        if (kw == "define") {
            MacroDef def = parse_define(toks, line_no);
            for (const auto& t : def.body) {
                if (t.kind == TokKind::Ident && t.text == def.name) {
                    throw CParseError(line_no, t.column, "recursive macro '" + def.name + "'");
                }
            }
            current[def.name] = def;
            res.macros[def.name] = def;
            MacroEvent e;
            e.line = line_no;
            e.is_define = true;
            e.def = std::move(def);
            events.push_back(std::move(e));
        } else if (kw == "undef") {
            if (toks.size() > 2) {
                current.erase(toks[2].text);
                MacroEvent e;
                e.line = line_no;
                e.undef_name = toks[2].text;
                events.push_back(std::move(e));
            }
        } else if (kw == "include" || kw == "include_next" || kw == "import") {
            std::string name;
            for (std::size_t k = 2; k < toks.size() && toks[k].kind != TokKind::Eof; ++k) {
                name += toks[k].text;
            }
            if (name.size() >= 2 && (name.front() == '<' || name.front() == '"')) {
                name = name.substr(1, name.size() - 2);
            }
            res.includes.push_back(name);
        }
    }
    if (!conds.empty()) {
        note(static_cast<int>(lines.size()), "unterminated conditional block at end of file");
    }

    reject_macro_cycles(res.macros);

    std::string joined;
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        if (i > 0) {
            joined += '\n';
        }
        joined += cleaned[i];
    }
    std::vector<Token> toks = lex_c(joined);
    res.tokens = Expander(std::move(toks), std::move(events), res.notes, file).run();
    return res;
}

} // namespace stublint
