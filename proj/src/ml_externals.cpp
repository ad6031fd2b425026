#include "stublint/ml_externals.hpp"

#include <cctype>
#include <string>
#include <utility>

namespace stublint {

std::string_view to_string(ArgKind kind) {
    switch (kind) {
        case ArgKind::BoxedValue: return "boxed_value";
        case ArgKind::UnboxedFloat: return "unboxed_float";
        case ArgKind::UnboxedInt32: return "unboxed_int32";
        case ArgKind::UnboxedInt64: return "unboxed_int64";
        case ArgKind::UnboxedNativeint: return "unboxed_nativeint";
        case ArgKind::UntaggedInt: return "untagged_int";
    }
    return "boxed_value";
}

namespace {

struct LexFailure {
    int line;
    int column;
    std::string message;
};

enum class MlTok { Ident, String, Char, TypeVar, Number, Symbol, AttrOpen, Eof };

struct MlToken {
    MlTok kind = MlTok::Eof;
    std::string text;
    int line = 1;
    int column = 1;
};

bool is_op_char(char c) {
    return std::string_view("!$%&*+-./:<=>?@^|~").find(c) != std::string_view::npos;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '\'';
}

class MlLexer {
public:
    explicit MlLexer(std::string_view src) : src_(src) {}

    std::vector<MlToken> run() {
        std::vector<MlToken> out;
        while (true) {
            skip_trivia();
            MlToken t = next();
            bool eof = t.kind == MlTok::Eof;
            out.push_back(std::move(t));
            if (eof) {
                break;
            }
        }
        return out;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (pos_ >= src_.size()) {
            return;
        }
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw LexFailure{line_, col_, msg};
    }

    // Returns true when a quoted string `{id|` starts at pos_; sets id.
    bool quoted_string_start(std::string& id) const {
        if (peek() != '{') {
            return false;
        }
        std::size_t i = pos_ + 1;
        while (i < src_.size()
               && (std::islower(static_cast<unsigned char>(src_[i])) != 0
                   || src_[i] == '_')) {
            ++i;
        }
        if (i < src_.size() && src_[i] == '|') {
            id.assign(src_.substr(pos_ + 1, i - pos_ - 1));
            return true;
        }
        return false;
    }

    std::string lex_quoted_string(const std::string& id) {
        for (std::size_t i = 0; i < id.size() + 2; ++i) {
            advance();
        }
        std::string terminator = "|" + id + "}";
        std::string body;
        while (pos_ < src_.size()) {
            if (src_.substr(pos_, terminator.size()) == terminator) {
                for (std::size_t i = 0; i < terminator.size(); ++i) {
                    advance();
                }
                return body;
            }
            body += peek();
            advance();
        }
        fail("unterminated quoted string");
    }

    std::string lex_string() {
        advance(); // opening quote
        std::string body;
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == '"') {
                advance();
                return body;
            }
            if (c == '\\') {
                advance();
                char e = peek();
                advance();
                switch (e) {
                    case 'n': body += '\n'; break;
                    case 't': body += '\t'; break;
                    case 'r': body += '\r'; break;
                    case 'b': body += '\b'; break;
                    case '\n':
                        while (peek() == ' ' || peek() == '\t') {
                            advance();
                        }
                        break;
                    default: body += e; break;
                }
                continue;
            }
            body += c;
            advance();
        }
        fail("unterminated string literal");
    }

    // Length of a char literal starting at pos_ (pointing at '\''), or 0.
    std::size_t char_literal_length() const {
        if (peek(1) == '\\') {
            std::size_t i = 2;
            char e = peek(i);
            if (std::isdigit(static_cast<unsigned char>(e)) != 0) {
                i += 3;
            } else if (e == 'x') {
                i += 3;
            } else if (e == 'o') {
                i += 4;
            } else if (e == 'u' && peek(3) == '{') {
                i = 4;
                while (peek(i) != '}' && peek(i) != '\0') {
                    ++i;
                }
                ++i;
            } else {
                i += 1;
            }
            return peek(i) == '\'' ? i + 1 : 0;
        }
        if (peek(1) != '\0' && peek(1) != '\n' && peek(2) == '\'') {
            return 3;
        }
        return 0;
    }

    void skip_comment() {
        int depth = 0;
        do {
            if (pos_ >= src_.size()) {
                fail("unterminated comment");
            }
            std::string qid;
            if (peek() == '(' && peek(1) == '*') {
                ++depth;
                advance();
                advance();
            } else if (peek() == '*' && peek(1) == ')') {
                --depth;
                advance();
                advance();
            } else if (peek() == '"') {
                lex_string();
            } else if (quoted_string_start(qid)) {
                lex_quoted_string(qid);
            } else if (peek() == '\'' && char_literal_length() > 0) {
                std::size_t n = char_literal_length();
                for (std::size_t i = 0; i < n; ++i) {
                    advance();
                }
            } else {
                advance();
            }
        } while (depth > 0);
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c)) != 0) {
                advance();
            } else if (c == '(' && peek(1) == '*') {
                skip_comment();
            } else {
                return;
            }
        }
    }

    MlToken next() {
        MlToken t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = MlTok::Eof;
            return t;
        }
        char c = peek();
        std::string qid;
        if (c == '"') {
            t.kind = MlTok::String;
            t.text = lex_string();
        } else if (quoted_string_start(qid)) {
            t.kind = MlTok::String;
            t.text = lex_quoted_string(qid);
        } else if (c == '\'') {
            std::size_t n = char_literal_length();
            if (n > 0) {
                t.kind = MlTok::Char;
                t.text.assign(src_.substr(pos_, n));
                for (std::size_t i = 0; i < n; ++i) {
                    advance();
                }
            } else {
                t.kind = MlTok::TypeVar;
                advance();
                t.text = "'";
                while (is_ident_char(peek())) {
                    t.text += peek();
                    advance();
                }
            }
        } else if (is_ident_start(c)) {
            t.kind = MlTok::Ident;
            while (is_ident_char(peek())) {
                t.text += peek();
                advance();
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            t.kind = MlTok::Number;
            while (std::isalnum(static_cast<unsigned char>(peek())) != 0
                   || peek() == '_' || peek() == '.') {
                t.text += peek();
                advance();
            }
        } else if (c == '[' && peek(1) == '@') {
            t.kind = MlTok::AttrOpen;
            t.text = "[";
            advance();
            while (peek() == '@') {
                t.text += '@';
                advance();
            }
        } else if (is_op_char(c)) {
            t.kind = MlTok::Symbol;
            while (is_op_char(peek())) {
                t.text += peek();
                advance();
            }
        } else {
            t.kind = MlTok::Symbol;
            t.text = std::string(1, c);
            advance();
        }
        return t;
    }
};

bool is_open(const MlToken& t) {
    return (t.kind == MlTok::Symbol && (t.text == "(" || t.text == "[" || t.text == "{"))
        || t.kind == MlTok::AttrOpen;
}

bool is_close(const MlToken& t) {
    return t.kind == MlTok::Symbol && (t.text == ")" || t.text == "]" || t.text == "}");
}

bool is_sym(const MlToken& t, std::string_view s) {
    return t.kind == MlTok::Symbol && t.text == s;
}

bool is_kw(const MlToken& t, std::string_view s) {
    return t.kind == MlTok::Ident && t.text == s;
}

bool starts_item(const MlToken& t) {
    if (t.kind == MlTok::Eof || is_sym(t, ";;")) {
        return true;
    }
    if (t.kind != MlTok::Ident) {
        return false;
    }
    static constexpr std::string_view kws[] = {
        "external", "let", "type", "val", "module", "open",
        "include", "exception", "class", "end", "struct", "sig",
    };
    for (auto kw : kws) {
        if (t.text == kw) {
            return true;
        }
    }
    return false;
}

using TokSpan = std::vector<MlToken>;

/// Splits at top-level arrows. Throws on unbalanced brackets.
/// Bracket nesting over a token stream. `<` opens an object type unless it
/// bounds a polymorphic variant (`[<`), and `>` closes only an object type.
class Nesting {
public:
    /// Updates the nesting for `t`; returns false on an unmatched closer.
    bool step(const MlToken& t) {
        bool after_bracket = prev_ != nullptr && is_sym(*prev_, "[");
        prev_ = &t;
        if (is_open(t) || (is_sym(t, "<") && !after_bracket)) {
            stack_.push_back(t.kind == MlTok::Symbol ? t.text : "[@");
            return true;
        }
        if (is_sym(t, ">") && !stack_.empty() && stack_.back() == "<") {
            stack_.pop_back();
            return true;
        }
        if (is_close(t)) {
            if (stack_.empty() || stack_.back() == "<") {
                return false;
            }
            stack_.pop_back();
        }
        return true;
    }
    int depth() const { return static_cast<int>(stack_.size()); }

private:
    std::vector<std::string> stack_;
    const MlToken* prev_ = nullptr;
};

std::vector<TokSpan> split_arrows(const TokSpan& toks) {
    std::vector<TokSpan> segs(1);
    Nesting nest;
    for (const auto& t : toks) {
        bool top = nest.depth() == 0;
        if (!nest.step(t)) {
            throw MlSyntaxError("unbalanced parentheses in type expression");
        }
        if (top && is_sym(t, "->")) {
            segs.emplace_back();
            continue;
        }
        segs.back().push_back(t);
    }
    if (nest.depth() != 0) {
        throw MlSyntaxError("unbalanced parentheses in type expression");
    }
    return segs;
}

struct SegmentInfo {
    std::string base;
    bool unboxed = false;
    bool untagged = false;
};

// Index of the bracket matching the opener at `open`, or npos.
std::size_t matching_close(const TokSpan& seg, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < seg.size(); ++i) {
        if (is_open(seg[i])) {
            ++depth;
        } else if (is_close(seg[i]) && --depth == 0) {
            return i;
        }
    }
    return std::string::npos;
}

SegmentInfo inspect_segment(TokSpan seg) {
    SegmentInfo info;
    // Drop a `~lbl:` / `?lbl:` / `lbl:` argument label.
    std::size_t skip = 0;
    if (!seg.empty() && (is_sym(seg[0], "~") || is_sym(seg[0], "?"))) {
        skip = 1;
    }
    if (seg.size() > skip + 1 && seg[skip].kind == MlTok::Ident && is_sym(seg[skip + 1], ":")) {
        seg.erase(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(skip + 2));
    } else if (skip == 1 && seg.size() > 1 && seg[1].kind == MlTok::Symbol
               && seg[1].text.size() > 1 && seg[1].text.back() == ':') {
        seg.erase(seg.begin(), seg.begin() + 2);
    }
    // `(t [@attr])` is written with parentheses around the whole argument.
    while (seg.size() >= 2 && is_sym(seg.front(), "(")
           && matching_close(seg, 0) == seg.size() - 1) {
        seg = TokSpan(seg.begin() + 1, seg.end() - 1);
    }
    TokSpan core;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        if (seg[i].kind == MlTok::AttrOpen && seg[i].text == "[@") {
            std::size_t close = matching_close(seg, i);
            if (close == std::string::npos) {
                break;
            }
            if (i + 1 < close && seg[i + 1].kind == MlTok::Ident) {
                if (seg[i + 1].text == "unboxed") {
                    info.unboxed = true;
                } else if (seg[i + 1].text == "untagged") {
                    info.untagged = true;
                }
            }
            i = close;
            continue;
        }
        core.push_back(seg[i]);
    }
    // A base type is a single (possibly qualified) type constructor.
    bool simple = !core.empty();
    for (const auto& t : core) {
        if (!(t.kind == MlTok::Ident || is_sym(t, "."))) {
            simple = false;
        }
    }
    if (simple) {
        info.base = core.back().text;
    }
    return info;
}

ArgKind kind_for(const SegmentInfo& seg, bool decl_unboxed, bool decl_untagged) {
    if (seg.unboxed || decl_unboxed) {
        if (seg.base == "float") {
            return ArgKind::UnboxedFloat;
        }
        if (seg.base == "int32") {
            return ArgKind::UnboxedInt32;
        }
        if (seg.base == "int64") {
            return ArgKind::UnboxedInt64;
        }
        if (seg.base == "nativeint") {
            return ArgKind::UnboxedNativeint;
        }
    }
    if ((seg.untagged || decl_untagged) && seg.base == "int") {
        return ArgKind::UntaggedInt;
    }
    return ArgKind::BoxedValue;
}

class ExternalParser {
public:
    ExternalParser(std::vector<MlToken> toks, std::string_view file)
        : toks_(std::move(toks)), file_(file) {}

    MlParseResult run() {
        MlParseResult result;
        std::size_t i = 0;
        while (toks_[i].kind != MlTok::Eof) {
            const MlToken& t = toks_[i];
            if (t.kind != MlTok::Ident) {
                ++i;
                continue;
            }
            if (t.text == "external") {
                pending_module_.reset();
                i = parse_external(i, result);
                continue;
            }
            track_modules(i);
            ++i;
        }
        return result;
    }

private:
    struct Frame {
        std::string name;
    };

    std::vector<MlToken> toks_;
    std::string_view file_;
    std::vector<Frame> frames_;
    std::optional<std::string> pending_module_;

    SourceLoc loc_of(const MlToken& t) const {
        return SourceLoc{std::string(file_), t.line, t.column};
    }

    void track_modules(std::size_t i) {
        const MlToken& t = toks_[i];
        if (t.text == "module") {
            std::size_t j = i + 1;
            while (is_kw(toks_[j], "type") || is_kw(toks_[j], "rec")) {
                ++j;
            }
            if (toks_[j].kind == MlTok::Ident) {
                pending_module_ = toks_[j].text;
            }
        } else if (t.text == "struct" || t.text == "sig") {
            frames_.push_back(Frame{pending_module_.value_or("")});
            pending_module_.reset();
        } else if (t.text == "begin" || t.text == "object") {
            frames_.push_back(Frame{""});
        } else if (t.text == "end") {
            if (!frames_.empty()) {
                std::string name = frames_.back().name;
                frames_.pop_back();
                // `module M : sig ... end = struct ... end`
                if (!name.empty() && is_sym(toks_[i + 1], "=") && is_kw(toks_[i + 2], "struct")) {
                    pending_module_ = name;
                }
            }
        } else if (t.text == "let" || t.text == "type" || t.text == "val"
                   || t.text == "open" || t.text == "include" || t.text == "exception") {
            pending_module_.reset();
        }
    }

    std::string module_path() const {
        std::string path;
        for (const auto& f : frames_) {
            if (!f.name.empty()) {
                path += f.name;
                path += '.';
            }
        }
        return path;
    }

    // Parses one declaration starting at the `external` token; returns the
    // index at which scanning resumes.
    std::size_t parse_external(std::size_t start, MlParseResult& result) {
        const MlToken& kw = toks_[start];
        std::size_t i = start + 1;
        auto issue = [&](const MlToken& at, std::string msg) {
            result.issues.push_back(MlParseIssue{loc_of(at), std::move(msg)});
        };

        std::string name;
        if (toks_[i].kind == MlTok::Ident) {
            name = toks_[i].text;
            ++i;
        } else if (is_sym(toks_[i], "(")) {
            ++i;
            while (!is_sym(toks_[i], ")") && toks_[i].kind != MlTok::Eof) {
                name += toks_[i].text;
                ++i;
            }
            if (toks_[i].kind == MlTok::Eof) {
                issue(kw, "unterminated operator name in external declaration");
                return i;
            }
            ++i;
        } else {
            issue(toks_[i], "expected a name after 'external'");
            return i;
        }

        if (!is_sym(toks_[i], ":")) {
            issue(toks_[i], "expected ':' after external name '" + name + "'");
            return i;
        }
        ++i;

        TokSpan type_toks;
        int depth = 0;
        while (true) {
            const MlToken& t = toks_[i];
            if (depth == 0 && is_sym(t, "=")) {
                break;
            }
            bool stop = t.kind == MlTok::Eof || (depth == 0 && starts_item(t))
                     || (depth > 0 && starts_item(t) && !is_kw(t, "module")
                         && !is_kw(t, "type") && !is_kw(t, "sig") && !is_kw(t, "end")
                         && !is_kw(t, "struct"));
            if (stop) {
                if (depth > 0) {
                    issue(kw, "unbalanced parentheses in type of external '" + name + "'");
                } else {
                    issue(kw, "missing '=' in external declaration '" + name + "'");
                }
                return i;
            }
            if (is_open(t)) {
                ++depth;
            } else if (is_close(t)) {
                if (--depth < 0) {
                    issue(t, "unbalanced parentheses in type of external '" + name + "'");
                    return i;
                }
            }
            type_toks.push_back(t);
            ++i;
        }
        ++i; // '='

        std::vector<std::string> names;
        while (toks_[i].kind == MlTok::String) {
            names.push_back(toks_[i].text);
            ++i;
        }
        if (names.empty()) {
            issue(toks_[i], "missing primitive name string in external '" + name + "'");
            return i;
        }

        ExternalDecl decl;
        decl.ocaml_name = module_path() + name;
        decl.byte_name = names[0];
        if (names.size() >= 2 && !names[1].empty() && names[1] != "float") {
            decl.native_name = names[1];
        }
        decl.loc = loc_of(kw);

        bool decl_unboxed = false;
        bool decl_untagged = false;
        while (toks_[i].kind == MlTok::AttrOpen && toks_[i].text == "[@@") {
            std::size_t j = i + 1;
            if (toks_[j].kind == MlTok::Ident) {
                if (toks_[j].text == "unboxed") {
                    decl_unboxed = true;
                } else if (toks_[j].text == "untagged") {
                    decl_untagged = true;
                } else if (toks_[j].text == "noalloc") {
                    decl.attrs.insert(ExternalAttr::Noalloc);
                }
            }
            int d = 1;
            while (d > 0 && toks_[j].kind != MlTok::Eof) {
                if (is_open(toks_[j])) {
                    ++d;
                } else if (is_close(toks_[j])) {
                    --d;
                }
                ++j;
            }
            i = j;
        }

        std::vector<TokSpan> segs;
        try {
            segs = split_arrows(type_toks);
        } catch (const MlSyntaxError& e) {
            issue(kw, e.what());
            return i;
        }
        decl.arity = static_cast<int>(segs.size()) - 1;
        if (decl.arity < 1) {
            issue(kw, "external '" + name + "' must have a function type");
            return i;
        }

        bool has_native = decl.native_name.has_value();
        auto classify = [&](const TokSpan& seg) {
            SegmentInfo info = inspect_segment(seg);
            if (info.unboxed || decl_unboxed) {
                decl.attrs.insert(ExternalAttr::Unboxed);
            }
            if (info.untagged || decl_untagged) {
                decl.attrs.insert(ExternalAttr::Untagged);
            }
            return has_native ? kind_for(info, decl_unboxed, decl_untagged) : ArgKind::BoxedValue;
        };
        for (int a = 0; a < decl.arity; ++a) {
            decl.arg_kinds.push_back(classify(segs[static_cast<std::size_t>(a)]));
        }
        decl.return_kind = classify(segs.back());
        result.decls.push_back(std::move(decl));
        return i;
    }
};

} // namespace

MlParseResult parse_ml_externals(std::string_view source_text, std::string_view file_name) {
    MlParseResult result;
    std::vector<MlToken> toks;
    try {
        toks = MlLexer(source_text).run();
    } catch (const LexFailure& e) {
        result.issues.push_back(
            MlParseIssue{SourceLoc{std::string(file_name), e.line, e.column}, e.message});
        return result;
    }
    return ExternalParser(std::move(toks), file_name).run();
}

int compute_arity(std::string_view type_expr) {
    std::vector<MlToken> toks;
    try {
        toks = MlLexer(type_expr).run();
    } catch (const LexFailure& e) {
        throw MlSyntaxError(e.message);
    }
    toks.pop_back(); // Eof
    return static_cast<int>(split_arrows(toks).size()) - 1;
}

} // namespace stublint
