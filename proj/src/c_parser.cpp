#include "stublint/c_ast.hpp"
#include "stublint/intrinsics.hpp"

#include <algorithm>
#include <set>

namespace stublint {

namespace {

const std::set<std::string, std::less<>> base_type_words{
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned",
    "_Bool", "__int128", "_Complex", "__signed__", "__signed",
};

const std::set<std::string, std::less<>> qualifier_words{
    "const", "volatile", "restrict", "__restrict", "__restrict__", "__const", "__volatile__",
    "register", "auto", "inline", "__inline", "__inline__", "_Noreturn", "__extension__",
    "static", "extern", "typedef", "_Thread_local", "__thread", "CAMLprim", "CAMLexport",
    "CAMLextern", "CAMLweakdef", "CAMLnoreturn_start", "CAMLnoreturn_end", "CAMLunused",
    "CAMLunused_start", "CAMLunused_end", "CAMLno_asan",
};

const std::set<std::string, std::less<>> statement_words{
    "if", "else", "while", "do", "for", "switch", "case", "default", "break", "continue",
    "return", "goto", "sizeof", "asm", "__asm", "__asm__", "_Alignof", "__alignof__",
    "struct", "union", "enum", "__attribute__", "__attribute", "typedef",
};

const std::set<std::string, std::less<>> opaque_builtins{
    "offsetof", "__builtin_offsetof", "va_arg", "__builtin_va_arg",
    "__builtin_types_compatible_p", "__builtin_choose_expr", "_Generic",
};

const std::set<std::string, std::less<>> assign_ops{
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=",
};

bool is_reserved(std::string_view s) {
    return base_type_words.count(s) != 0 || qualifier_words.count(s) != 0
           || statement_words.count(s) != 0;
}

int binary_precedence(const Token& t) {
    if (t.kind != TokKind::Punct) {
        return -1;
    }
    static const std::map<std::string, int, std::less<>> table{
        {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5}, {"==", 6}, {"!=", 6},
        {"<", 7}, {">", 7}, {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8},
        {"+", 9}, {"-", 9}, {"*", 10}, {"/", 10}, {"%", 10},
    };
    auto it = table.find(t.text);
    return it == table.end() ? -1 : it->second;
}

std::map<std::string, CType> builtin_typedefs() {
    std::map<std::string, CType> m;
    m["value"] = CType::value();
    for (const char* n : {"intnat", "uintnat", "int64_t", "uint64_t", "size_t", "ssize_t",
                          "mlsize_t", "header_t", "intptr_t", "uintptr_t", "ptrdiff_t", "off_t",
                          "int64", "uint64", "ulong"}) {
        m[n] = CType::integer(n, 64);
    }
    for (const char* n : {"int32_t", "uint32_t", "int32", "uint32", "pid_t", "uid_t", "gid_t",
                          "mode_t", "uint", "socklen_t"}) {
        m[n] = CType::integer(n, 32);
    }
    for (const char* n : {"int16_t", "uint16_t"}) {
        m[n] = CType::integer(n, 16);
    }
    for (const char* n : {"int8_t", "uint8_t", "tag_t", "bool"}) {
        m[n] = CType::integer(n, 8);
    }
    m["FILE"] = CType::record("FILE");
    m["va_list"] = CType::unknown("va_list");
    return m;
}

struct Specs {
    CType type;
    bool is_typedef = false;
    bool is_static = false;
    bool is_camlprim = false;
    bool consumed = false;
};

struct DeclInfo {
    std::string name;
    CType type;
    bool is_function = false;
    std::vector<Variable> params;
    bool void_params = false;
    bool variadic = false;
    int line = 0;
    int column = 0;
};

class Parser {
public:
    Parser(const std::vector<Token>& toks, StubUnit& unit)
        : toks_(toks), unit_(unit), typedefs_(builtin_typedefs()) {}

    void run() {
        while (cur().kind != TokKind::Eof) {
            std::size_t start = pos_;
            try {
                external_declaration();
            } catch (const CParseError& e) {
                add_diag(RuleId::Note, Severity::Note, e.line(), e.column(),
                         std::string("top-level construct skipped: ") + e.what());
                pos_ = start;
                resync_top_level();
            }
        }
    }

private:
    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    StubUnit& unit_;
    std::map<std::string, CType> typedefs_;
    std::set<std::string> vars_;
    std::set<std::string> function_names_;
    StubFunction* fn_ = nullptr;

    // ---- token helpers ------------------------------------------------

    const Token& cur() const { return at_index(pos_); }
    const Token& peek(std::size_t n) const { return at_index(pos_ + n); }
    const Token& at_index(std::size_t i) const {
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(std::string_view s) const { return cur().is(s); }
    bool accept(std::string_view s) {
        if (at(s)) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = cur();
        std::string found = t.kind == TokKind::Eof ? "end of input" : "'" + t.text + "'";
        throw CParseError(t.line, t.column, msg + " before " + found);
    }
    void expect(std::string_view s) {
        if (!accept(s)) {
            fail("expected '" + std::string(s) + "'");
        }
    }
    std::string expect_ident() {
        if (cur().kind != TokKind::Ident) {
            fail("expected identifier");
        }
        return toks_[pos_++].text;
    }

    void add_diag(RuleId rule, Severity sev, int line, int column, std::string msg) {
        unit_.diagnostics.push_back(
            make_diag(rule, sev, SourceLoc{unit_.file, line, column}, std::move(msg)));
    }

    /// Index of the token closing the bracket at `open`.
    std::size_t matching(std::size_t open) const {
        const std::string o = at_index(open).text;
        const std::string c = o == "(" ? ")" : o == "[" ? "]" : "}";
        int depth = 0;
        for (std::size_t i = open; i < toks_.size(); ++i) {
            const Token& t = toks_[i];
            if (t.kind == TokKind::Eof) {
                break;
            }
            if (t.kind != TokKind::Punct) {
                continue;
            }
            if (t.text == o) {
                ++depth;
            } else if (t.text == c && --depth == 0) {
                return i;
            }
        }
        const Token& t = at_index(open);
        throw CParseError(t.line, t.column, "unbalanced '" + o + "'");
    }

    void skip_balanced() { pos_ = matching(pos_) + 1; }

    void skip_attributes() {
        while (cur().kind == TokKind::Ident
               && (cur().text == "__attribute__" || cur().text == "__attribute"
                   || cur().text == "__asm__" || cur().text == "__asm" || cur().text == "asm")) {
            ++pos_;
            while (cur().kind == TokKind::Ident && (cur().text == "volatile" || cur().text == "__volatile__")) {
                ++pos_;
            }
            if (at("(")) {
                skip_balanced();
            }
        }
    }

    void resync_top_level() {
        std::size_t start = pos_;
        while (cur().kind != TokKind::Eof) {
            if (accept(";")) {
                break;
            }
            if (at("{")) {
                try {
                    skip_balanced();
                } catch (const CParseError&) {
                    pos_ = toks_.size() - 1;
                    break;
                }
                accept(";");
                break;
            }
            if (at("(") || at("[")) {
                try {
                    skip_balanced();
                } catch (const CParseError&) {
                    pos_ = toks_.size() - 1;
                }
                continue;
            }
            ++pos_;
        }
        if (pos_ == start && cur().kind != TokKind::Eof) {
            ++pos_;
        }
    }

    // ---- types and declarators ----------------------------------------

    Specs parse_specs(bool allow_unknown) {
        Specs sp;
        std::size_t start = pos_;
        bool have_type = false;
        std::vector<std::string> words;
        while (cur().kind == TokKind::Ident) {
            const std::string& s = cur().text;
            if (qualifier_words.count(s) != 0) {
                sp.is_typedef |= s == "typedef";
                sp.is_static |= s == "static";
                sp.is_camlprim |= s == "CAMLprim" || s == "CAMLexport";
                ++pos_;
                continue;
            }
            if (s == "__attribute__" || s == "__attribute" || s == "__declspec") {
                ++pos_;
                if (at("(")) {
                    skip_balanced();
                }
                continue;
            }
            if (base_type_words.count(s) != 0) {
                words.push_back(s);
                ++pos_;
                continue;
            }
            if (have_type || !words.empty()) {
                break;
            }
            if (s == "struct" || s == "union" || s == "enum") {
                bool is_enum = s == "enum";
                ++pos_;
                skip_attributes();
                std::string tag = "<anonymous>";
                if (cur().kind == TokKind::Ident) {
                    tag = toks_[pos_++].text;
                }
                if (at("{")) {
                    skip_balanced();
                }
                sp.type = is_enum ? CType::integer("enum " + tag, 32) : CType::record(tag);
                have_type = true;
                continue;
            }
            if (auto it = typedefs_.find(s); it != typedefs_.end()) {
                sp.type = it->second;
                have_type = true;
                ++pos_;
                continue;
            }
            if (allow_unknown && !is_reserved(s) && vars_.count(s) == 0) {
                sp.type = CType::unknown(s);
                have_type = true;
                ++pos_;
                continue;
            }
            break;
        }
        if (!words.empty()) {
            sp.type = type_from_words(words);
        } else if (!have_type) {
            sp.type = CType::integer("int", 32);
        }
        sp.consumed = pos_ != start;
        return sp;
    }

    static CType type_from_words(const std::vector<std::string>& words) {
        auto has = [&](std::string_view w) {
            return std::find(words.begin(), words.end(), w) != words.end();
        };
        std::string spelled;
        for (const auto& w : words) {
            spelled += (spelled.empty() ? "" : " ") + w;
        }
        if (has("void")) return CType::unknown("void");
        if (has("float") || has("double")) return CType::floating(spelled);
        if (has("char") || has("_Bool")) return CType::integer(spelled, 8);
        if (has("short")) return CType::integer(spelled, 16);
        if (has("long") || has("__int128")) return CType::integer(spelled, 64);
        return CType::integer(spelled, 32);
    }

    void skip_pointer_qualifiers() {
        while (cur().kind == TokKind::Ident
               && (cur().text == "const" || cur().text == "volatile" || cur().text == "restrict"
                   || cur().text == "__restrict" || cur().text == "__restrict__"
                   || cur().text == "__const")) {
            ++pos_;
        }
        skip_attributes();
    }

    DeclInfo parse_declarator(const CType& base) {
        DeclInfo d;
        d.type = base;
        d.line = cur().line;
        d.column = cur().column;
        while (accept("*")) {
            d.type = CType::pointer_to(d.type);
            skip_pointer_qualifiers();
        }
        skip_attributes();
        if (at("(") && (peek(1).is("*") || peek(1).is("^"))) {
            ++pos_;
            int stars = 0;
            while (accept("*") || accept("^")) {
                ++stars;
                skip_pointer_qualifiers();
            }
            if (cur().kind == TokKind::Ident && !is_reserved(cur().text)) {
                d.line = cur().line;
                d.column = cur().column;
                d.name = toks_[pos_++].text;
            }
            while (at("[")) {
                skip_balanced();
            }
            expect(")");
            if (at("(")) {
                skip_balanced();
                d.type = CType::pointer_to(CType::unknown("function"));
            } else {
                for (int i = 0; i < stars; ++i) {
                    d.type = CType::pointer_to(d.type);
                }
            }
        } else if (cur().kind == TokKind::Ident && !is_reserved(cur().text)) {
            d.line = cur().line;
            d.column = cur().column;
            d.name = toks_[pos_++].text;
        }
        while (true) {
            if (at("[")) {
                skip_balanced();
                d.type = CType::pointer_to(d.type);
            } else if (at("(") && !d.is_function) {
                parse_params(d);
                d.is_function = true;
            } else {
                break;
            }
        }
        skip_attributes();
        return d;
    }

    void parse_params(DeclInfo& d) {
        expect("(");
        if (accept(")")) {
            return;
        }
        if (at("void") && peek(1).is(")")) {
            pos_ += 2;
            d.void_params = true;
            return;
        }
        while (true) {
            if (accept("...")) {
                d.variadic = true;
                expect(")");
                return;
            }
            Specs sp = parse_specs(true);
            if (!sp.consumed) {
                fail("expected parameter declaration");
            }
            DeclInfo p = parse_declarator(sp.type);
            if (p.is_function) {
                p.type = CType::pointer_to(CType::unknown("function"));
            }
            d.params.push_back(Variable{p.name, p.type, p.line, p.column});
            if (accept(",")) {
                continue;
            }
            expect(")");
            return;
        }
    }

    CType parse_type_name() {
        Specs sp = parse_specs(true);
        DeclInfo d = parse_declarator(sp.type);
        if (d.is_function) {
            return CType::pointer_to(CType::unknown("function"));
        }
        return d.type;
    }

    bool is_type_name_at(std::size_t i) const {
        const Token& t = at_index(i);
        if (t.kind != TokKind::Ident) {
            return false;
        }
        const std::string& s = t.text;
        if (base_type_words.count(s) != 0 || s == "const" || s == "volatile" || s == "struct"
            || s == "union" || s == "enum" || s == "__extension__") {
            return true;
        }
        if (vars_.count(s) != 0 || function_names_.count(s) != 0 || is_reserved(s)) {
            return false;
        }
        if (typedefs_.count(s) != 0) {
            return true;
        }
        std::size_t j = i + 1;
        while (at_index(j).is("*") || at_index(j).is("const")) {
            ++j;
        }
        if (!at_index(j).is(")")) {
            return false;
        }
        if (j > i + 1) {
            return true;
        }
        const Token& next = at_index(j + 1);
        return next.kind == TokKind::Ident || next.kind == TokKind::Number
               || next.kind == TokKind::String || next.kind == TokKind::Char || next.is("(");
    }

    // ---- top level ----------------------------------------------------

    void external_declaration() {
        if (accept(";")) {
            return;
        }
        if (cur().kind == TokKind::Ident
            && (cur().text == "asm" || cur().text == "__asm__" || cur().text == "__asm")) {
            resync_top_level();
            return;
        }
        Specs sp = parse_specs(true);
        if (accept(";")) {
            return;
        }
        while (true) {
            DeclInfo d = parse_declarator(sp.type);
            if (d.name.empty() && !d.is_function) {
                fail("expected declarator");
            }
            if (sp.is_typedef) {
                CType t = d.is_function ? CType::pointer_to(CType::unknown("function")) : d.type;
                typedefs_[d.name] = t;
                unit_.typedefs[d.name] = t;
            } else if (d.is_function && at("{")) {
                function_definition(sp, d);
                return;
            } else if (d.is_function) {
                StubFunction f = make_function(sp, d);
                function_names_.insert(f.name);
                unit_.declarations.push_back(std::move(f));
            } else {
                unit_.globals.push_back(Variable{d.name, d.type, d.line, d.column});
                vars_.insert(d.name);
            }
            if (accept("=")) {
                skip_initializer();
            }
            if (accept(",")) {
                continue;
            }
            expect(";");
            return;
        }
    }

    void skip_initializer() {
        while (cur().kind != TokKind::Eof && !at(",") && !at(";")) {
            if (at("(") || at("[") || at("{")) {
                skip_balanced();
            } else {
                ++pos_;
            }
        }
    }

    StubFunction make_function(const Specs& sp, const DeclInfo& d) {
        StubFunction f;
        f.name = d.name;
        f.return_type = d.type;
        f.params = d.params;
        f.line = d.line;
        f.column = d.column;
        f.is_camlprim = sp.is_camlprim || d.type.is_value();
        f.is_static = sp.is_static;
        f.void_params = d.void_params;
        f.variadic = d.variadic;
        f.globals = unit_.globals;
        return f;
    }

    void function_definition(const Specs& sp, const DeclInfo& d) {
        StubFunction f = make_function(sp, d);
        function_names_.insert(f.name);
        std::size_t close = 0;
        try {
            close = matching(pos_);
        } catch (const CParseError& e) {
            f.parse_failed = true;
            add_diag(RuleId::UnsupportedConstruct, Severity::Error, e.line(), e.column(),
                     "parse error in function '" + f.name + "': " + e.what());
            add_function(std::move(f));
            pos_ = toks_.size() - 1;
            return;
        }

        std::set<std::string> saved_vars = vars_;
        for (const auto& p : f.params) {
            vars_.insert(p.name);
        }
        fn_ = &f;
        try {
            f.body = parse_compound();
        } catch (const CParseError& e) {
            f.parse_failed = true;
            f.body.reset();
            add_diag(RuleId::UnsupportedConstruct, Severity::Error, e.line(), e.column(),
                     "parse error in function '" + f.name + "': " + e.what());
            pos_ = close + 1;
        }
        fn_ = nullptr;
        vars_ = std::move(saved_vars);
        add_function(std::move(f));
    }

    void add_function(StubFunction f) {
        if (unit_.find_function(f.name) != nullptr) {
            add_diag(RuleId::Note, Severity::Note, f.line, f.column,
                     "duplicate definition of '" + f.name + "' ignored");
            return;
        }
        unit_.functions.push_back(std::move(f));
    }

    // ---- statements ---------------------------------------------------

    std::unique_ptr<Stmt> make_stmt(StmtKind kind, const Token& at_tok) {
        auto s = std::make_unique<Stmt>();
        s->kind = kind;
        s->line = at_tok.line;
        s->column = at_tok.column;
        return s;
    }

    std::unique_ptr<Stmt> parse_compound() {
        auto s = make_stmt(StmtKind::Compound, cur());
        expect("{");
        while (!accept("}")) {
            if (cur().kind == TokKind::Eof) {
                fail("expected '}'");
            }
            s->children.push_back(parse_stmt());
        }
        return s;
    }

    void register_local(const std::string& name, const CType& type, int line, int column) {
        if (fn_ != nullptr && !name.empty()) {
            fn_->locals.push_back(Variable{name, type, line, column});
        }
        vars_.insert(name);
    }

    std::unique_ptr<Stmt> parse_stmt() {
        const Token t = cur();
        if (at("{")) {
            return parse_compound();
        }
        if (accept(";")) {
            return make_stmt(StmtKind::Empty, t);
        }
        if (t.kind == TokKind::Ident) {
            const std::string& kw = t.text;
            if (kw == "if") {
                auto s = make_stmt(StmtKind::If, t);
                ++pos_;
                expect("(");
                s->expr = parse_expr();
                expect(")");
                s->body = parse_stmt();
                if (accept("else")) {
                    s->else_body = parse_stmt();
                }
                return s;
            }
            if (kw == "while") {
                auto s = make_stmt(StmtKind::While, t);
                ++pos_;
                expect("(");
                s->expr = parse_expr();
                expect(")");
                s->body = parse_stmt();
                return s;
            }
            if (kw == "do") {
                auto s = make_stmt(StmtKind::DoWhile, t);
                ++pos_;
                s->body = parse_stmt();
                expect("while");
                expect("(");
                s->expr = parse_expr();
                expect(")");
                expect(";");
                return s;
            }
            if (kw == "for") {
                auto s = make_stmt(StmtKind::For, t);
                ++pos_;
                expect("(");
                if (!accept(";")) {
                    if (is_declaration_start()) {
                        s->init = parse_declaration();
                    } else {
                        auto e = make_stmt(StmtKind::Expr, cur());
                        e->expr = parse_expr();
                        expect(";");
                        s->init = std::move(e);
                    }
                }
                if (!at(";")) {
                    s->expr = parse_expr();
                }
                expect(";");
                if (!at(")")) {
                    s->step = parse_expr();
                }
                expect(")");
                s->body = parse_stmt();
                return s;
            }
            if (kw == "switch") {
                auto s = make_stmt(StmtKind::Switch, t);
                ++pos_;
                expect("(");
                s->expr = parse_expr();
                expect(")");
                s->body = parse_stmt();
                return s;
            }
            if (kw == "case") {
                auto s = make_stmt(StmtKind::Case, t);
                ++pos_;
                s->expr = parse_cond();
                if (accept("...")) {
                    parse_cond();
                }
                expect(":");
                return s;
            }
            if (kw == "default" && peek(1).is(":")) {
                pos_ += 2;
                return make_stmt(StmtKind::Default, t);
            }
            if (kw == "break" || kw == "continue") {
                ++pos_;
                expect(";");
                return make_stmt(kw == "break" ? StmtKind::Break : StmtKind::Continue, t);
            }
            if (kw == "return") {
                auto s = make_stmt(StmtKind::Return, t);
                ++pos_;
                if (!at(";")) {
                    s->expr = parse_expr();
                }
                expect(";");
                return s;
            }
            if (kw == "goto") {
                ++pos_;
                if (accept("*")) {
                    auto s = make_stmt(StmtKind::Opaque, t);
                    s->expr = parse_expr();
                    expect(";");
                    add_diag(RuleId::UnsupportedConstruct, Severity::Warning, t.line, t.column,
                             "computed goto is not analyzed");
                    return s;
                }
                auto s = make_stmt(StmtKind::Goto, t);
                s->name = expect_ident();
                expect(";");
                add_diag(RuleId::UnsupportedConstruct, Severity::Warning, t.line, t.column,
                         "goto is not supported; lock and value facts across the jump are approximate");
                return s;
            }
            if (kw == "asm" || kw == "__asm__" || kw == "__asm") {
                auto s = make_stmt(StmtKind::Opaque, t);
                ++pos_;
                skip_attributes();
                while (cur().kind == TokKind::Ident) {
                    ++pos_;
                }
                if (at("(")) {
                    skip_balanced();
                }
                expect(";");
                return s;
            }
            if (peek(1).is(":") && !is_reserved(kw)) {
                auto s = make_stmt(StmtKind::Label, t);
                s->name = kw;
                pos_ += 2;
                if (!at("}")) {
                    s->body = parse_stmt();
                }
                return s;
            }
            int count = 0;
            IntrinsicKind mk = classify_statement_macro(kw, count);
            if (mk != IntrinsicKind::None && (peek(1).is("(") || kw == "CAMLreturn0")) {
                return parse_caml_macro(mk, count);
            }
            if (is_declaration_start()) {
                return parse_declaration();
            }
        }
        auto s = make_stmt(StmtKind::Expr, t);
        s->expr = parse_expr();
        expect(";");
        return s;
    }

    std::unique_ptr<Stmt> parse_caml_macro(IntrinsicKind mk, int count) {
        const Token t = cur();
        ++pos_;
        if (mk == IntrinsicKind::CamlReturn) {
            auto s = make_stmt(StmtKind::CamlReturn, t);
            s->name = t.text;
            if (t.text == "CAMLreturn0") {
                if (at("(")) {
                    expect("(");
                    expect(")");
                }
            } else {
                expect("(");
                if (t.text == "CAMLreturnT") {
                    parse_type_name();
                    expect(",");
                }
                s->expr = parse_expr();
                expect(")");
            }
            accept(";");
            return s;
        }

        auto s = make_stmt(mk == IntrinsicKind::CamlLocal ? StmtKind::CamlLocal : StmtKind::CamlParam, t);
        s->name = t.text;
        s->count = count;
        s->xparam = mk == IntrinsicKind::CamlXparam;
        expect("(");
        std::vector<std::unique_ptr<Expr>> args;
        if (!at(")")) {
            while (true) {
                args.push_back(parse_assign());
                if (!accept(",")) {
                    break;
                }
            }
        }
        expect(")");
        accept(";");
        bool array_form = t.text == "CAMLlocalN" || t.text == "CAMLxparamN";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (array_form && i > 0) {
                break;
            }
            if (args[i]->kind == ExprKind::Ident) {
                s->names.push_back(args[i]->text);
            }
        }
        if (mk == IntrinsicKind::CamlLocal) {
            CType vt = CType::value();
            for (const auto& n : s->names) {
                register_local(n, array_form ? CType::pointer_to(vt) : vt, t.line, t.column);
            }
        }
        return s;
    }

    bool is_declaration_start() const {
        const Token& t = cur();
        if (t.kind != TokKind::Ident) {
            return false;
        }
        const std::string& s = t.text;
        if (s == "sizeof" || s == "_Alignof" || s == "__alignof__" || s == "asm"
            || s == "__asm__") {
            return false;
        }
        if (qualifier_words.count(s) != 0 || base_type_words.count(s) != 0 || s == "struct"
            || s == "union" || s == "enum" || s == "__attribute__" || s == "typedef") {
            return true;
        }
        if (is_reserved(s) || vars_.count(s) != 0) {
            return false;
        }
        if (typedefs_.count(s) != 0) {
            return !(peek(1).is("(") && !peek(2).is("*"));
        }
        const Token& next = peek(1);
        if (next.kind == TokKind::Ident && !is_reserved(next.text)) {
            return true;
        }
        if (next.is("*")) {
            std::size_t k = 1;
            while (peek(k).is("*") || peek(k).is("const")) {
                ++k;
            }
            const Token& name = peek(k);
            if (name.kind != TokKind::Ident || is_reserved(name.text)) {
                return false;
            }
            const Token& after = peek(k + 1);
            return after.is("=") || after.is(";") || after.is(",") || after.is("[") || after.is(")");
        }
        return false;
    }

    std::unique_ptr<Stmt> parse_declaration() {
        const Token t = cur();
        auto s = make_stmt(StmtKind::Decl, t);
        Specs sp = parse_specs(true);
        if (accept(";")) {
            s->kind = StmtKind::Empty;
            return s;
        }
        while (true) {
            DeclInfo d = parse_declarator(sp.type);
            if (d.name.empty()) {
                fail("expected declarator");
            }
            if (sp.is_typedef) {
                typedefs_[d.name] = d.type;
            } else {
                Declarator dc;
                dc.name = d.name;
                dc.type = d.is_function ? CType::pointer_to(CType::unknown("function")) : d.type;
                dc.line = d.line;
                dc.column = d.column;
                if (accept("=")) {
                    dc.init = parse_initializer();
                }
                if (!d.is_function) {
                    register_local(dc.name, dc.type, dc.line, dc.column);
                }
                s->decls.push_back(std::move(dc));
            }
            if (accept(",")) {
                continue;
            }
            expect(";");
            break;
        }
        if (sp.is_typedef) {
            s->kind = StmtKind::Empty;
        }
        return s;
    }

    // ---- expressions --------------------------------------------------

    static std::unique_ptr<Expr> make_expr(ExprKind kind, int line, int column, std::string text = {}) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->line = line;
        e->column = column;
        e->text = std::move(text);
        return e;
    }

    std::unique_ptr<Expr> parse_initializer() {
        if (at("{")) {
            return parse_init_list();
        }
        return parse_assign();
    }

    std::unique_ptr<Expr> parse_init_list() {
        auto e = make_expr(ExprKind::InitList, cur().line, cur().column);
        expect("{");
        while (!accept("}")) {
            bool designated = false;
            while (true) {
                if (at(".") && peek(1).kind == TokKind::Ident) {
                    pos_ += 2;
                    designated = true;
                } else if (at("[")) {
                    skip_balanced();
                    designated = true;
                } else {
                    break;
                }
            }
            if (designated) {
                expect("=");
            }
            e->kids.push_back(parse_initializer());
            if (!accept(",")) {
                expect("}");
                break;
            }
        }
        return e;
    }

    std::unique_ptr<Expr> parse_expr() {
        auto lhs = parse_assign();
        while (at(",")) {
            ++pos_;
            auto e = make_expr(ExprKind::Binary, lhs->line, lhs->column, ",");
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(parse_assign());
            lhs = std::move(e);
        }
        return lhs;
    }

    std::unique_ptr<Expr> parse_assign() {
        auto lhs = parse_cond();
        if (cur().kind == TokKind::Punct && assign_ops.count(cur().text) != 0) {
            auto e = make_expr(ExprKind::Assign, lhs->line, lhs->column, toks_[pos_++].text);
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(parse_assign());
            return e;
        }
        return lhs;
    }

    std::unique_ptr<Expr> parse_cond() {
        auto c = parse_binary(1);
        if (!at("?")) {
            return c;
        }
        ++pos_;
        auto e = make_expr(ExprKind::Ternary, c->line, c->column);
        std::unique_ptr<Expr> a;
        if (at(":")) {
            a = make_expr(ExprKind::Opaque, cur().line, cur().column);
        } else {
            a = parse_expr();
        }
        expect(":");
        auto b = parse_cond();
        e->kids.push_back(std::move(c));
        e->kids.push_back(std::move(a));
        e->kids.push_back(std::move(b));
        return e;
    }

    std::unique_ptr<Expr> parse_binary(int min_prec) {
        auto lhs = parse_unary();
        while (true) {
            int prec = binary_precedence(cur());
            if (prec < min_prec) {
                return lhs;
            }
            std::string op = toks_[pos_++].text;
            auto rhs = parse_binary(prec + 1);
            auto e = make_expr(ExprKind::Binary, lhs->line, lhs->column, op);
            e->kids.push_back(std::move(lhs));
            e->kids.push_back(std::move(rhs));
            lhs = std::move(e);
        }
    }

    std::unique_ptr<Expr> parse_unary() {
        const Token t = cur();
        if (t.kind == TokKind::Punct) {
            if (t.text == "++" || t.text == "--" || t.text == "&" || t.text == "*" || t.text == "+"
                || t.text == "-" || t.text == "~" || t.text == "!") {
                ++pos_;
                auto e = make_expr(ExprKind::Unary, t.line, t.column, t.text);
                e->kids.push_back(parse_unary());
                return e;
            }
            if (t.text == "&&" && peek(1).kind == TokKind::Ident) {
                pos_ += 2;
                return make_expr(ExprKind::Opaque, t.line, t.column, "&&label");
            }
            if (t.text == "(") {
                if (peek(1).is("{")) {
                    skip_balanced();
                    return make_expr(ExprKind::Opaque, t.line, t.column, "({...})");
                }
                if (is_type_name_at(pos_ + 1)) {
                    ++pos_;
                    CType type = parse_type_name();
                    expect(")");
                    if (at("{")) {
                        auto e = make_expr(ExprKind::CompoundLit, t.line, t.column);
                        e->type = type;
                        e->kids.push_back(parse_init_list());
                        return parse_postfix(std::move(e));
                    }
                    auto e = make_expr(ExprKind::Cast, t.line, t.column);
                    e->type = type;
                    e->kids.push_back(parse_unary());
                    return e;
                }
            }
        }
        if (t.kind == TokKind::Ident) {
            if (t.text == "sizeof" || t.text == "_Alignof" || t.text == "__alignof__"
                || t.text == "alignof") {
                ++pos_;
                if (at("(") && is_type_name_at(pos_ + 1)) {
                    ++pos_;
                    auto e = make_expr(ExprKind::SizeofType, t.line, t.column);
                    e->type = parse_type_name();
                    expect(")");
                    return e;
                }
                auto e = make_expr(ExprKind::SizeofExpr, t.line, t.column);
                e->kids.push_back(parse_unary());
                return e;
            }
            if (t.text == "__extension__") {
                ++pos_;
                return parse_unary();
            }
        }
        return parse_postfix(parse_primary());
    }

    std::unique_ptr<Expr> parse_primary() {
        const Token t = cur();
        switch (t.kind) {
            case TokKind::Ident: {
                if (is_reserved(t.text)) {
                    fail("unexpected keyword in expression");
                }
                ++pos_;
                if (opaque_builtins.count(t.text) != 0 && at("(")) {
                    skip_balanced();
                    return make_expr(ExprKind::Opaque, t.line, t.column, t.text + "(...)");
                }
                return make_expr(ExprKind::Ident, t.line, t.column, t.text);
            }
            case TokKind::Number: {
                ++pos_;
                bool hex = t.text.size() > 1 && t.text[0] == '0' && (t.text[1] == 'x' || t.text[1] == 'X');
                bool is_float = t.text.find('.') != std::string::npos
                                || (!hex && t.text.find_first_of("eE") != std::string::npos)
                                || (hex && t.text.find_first_of("pP") != std::string::npos);
                return make_expr(is_float ? ExprKind::FloatLit : ExprKind::IntLit, t.line, t.column, t.text);
            }
            case TokKind::String: {
                auto e = make_expr(ExprKind::StrLit, t.line, t.column, t.text);
                ++pos_;
                while (cur().kind == TokKind::String) {
                    e->text += toks_[pos_++].text;
                }
                return e;
            }
            case TokKind::Char:
                ++pos_;
                return make_expr(ExprKind::CharLit, t.line, t.column, t.text);
            case TokKind::Punct:
                if (t.text == "(") {
                    ++pos_;
                    auto e = parse_expr();
                    expect(")");
                    return e;
                }
                break;
            case TokKind::Eof:
                break;
        }
        fail("expected expression");
    }

    std::unique_ptr<Expr> parse_postfix(std::unique_ptr<Expr> e) {
        while (true) {
            const Token t = cur();
            if (t.is("[")) {
                ++pos_;
                auto x = make_expr(ExprKind::Index, e->line, e->column);
                x->kids.push_back(std::move(e));
                x->kids.push_back(parse_expr());
                expect("]");
                e = std::move(x);
            } else if (t.is("(")) {
                ++pos_;
                auto x = make_expr(ExprKind::Call, e->line, e->column);
                x->kids.push_back(std::move(e));
                if (!accept(")")) {
                    while (true) {
                        x->kids.push_back(parse_assign());
                        if (accept(")")) {
                            break;
                        }
                        expect(",");
                    }
                }
                e = std::move(x);
            } else if (t.is(".") || t.is("->")) {
                ++pos_;
                auto x = make_expr(ExprKind::Member, e->line, e->column, expect_ident());
                x->arrow = t.text == "->";
                x->kids.push_back(std::move(e));
                e = std::move(x);
            } else if (t.is("++") || t.is("--")) {
                ++pos_;
                auto x = make_expr(ExprKind::Postfix, e->line, e->column, t.text);
                x->kids.push_back(std::move(e));
                e = std::move(x);
            } else {
                return e;
            }
        }
    }
};

} // namespace

StubUnit parse_tokens(const PreprocessResult& pre, std::string_view file) {
    StubUnit unit;
    unit.file = std::string(file);
    unit.local_macros = pre.macros;
    unit.includes = pre.includes;
    unit.diagnostics = pre.notes;
    std::vector<Token> toks = pre.tokens;
    if (toks.empty() || toks.back().kind != TokKind::Eof) {
        toks.push_back(Token{});
    }
    Parser parser(toks, unit);
    parser.run();
    return unit;
}

StubUnit parse_unit(std::string_view source, std::string_view file) {
    return parse_tokens(preprocess_local(source, file), file);
}

} // namespace stublint
