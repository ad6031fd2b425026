#pragma once

#include "stublint/c_preprocess.hpp"
#include "stublint/diagnostic.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace stublint {

/// Types as written in the analyzed C source. Arrays are modeled as
/// pointers; `void` is an Unknown named "void".
struct CType {
    enum class Kind { CamlValue, Pointer, Integer, Floating, Record, Unknown };

    Kind kind = Kind::Unknown;
    std::string name;
    int width = 0;
    std::shared_ptr<const CType> pointee;

    static CType value();
    static CType pointer_to(const CType& target);
    static CType integer(std::string name, int width);
    static CType floating(std::string name);
    static CType record(std::string name);
    static CType unknown(std::string name);

    bool is_value() const { return kind == Kind::CamlValue; }
    bool is_pointer() const { return kind == Kind::Pointer; }
    bool is_void() const { return kind == Kind::Unknown && name == "void"; }
    /// True for `value *` (argv blocks, CAMLlocalN arrays).
    bool is_value_pointer() const { return is_pointer() && pointee && pointee->is_value(); }
    std::string spelling() const;
};

enum class ExprKind {
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Call,       // kids[0] callee, kids[1..] arguments
    Unary,      // prefix operator in `text`
    Postfix,    // `++` / `--`
    Binary,
    Assign,     // `=` or compound operator in `text`; kids = {lhs, rhs}
    Cast,       // `type` is the target; kids = {operand}
    Member,     // `text` is the field, `arrow` for `->`
    Index,
    Ternary,
    SizeofType,
    SizeofExpr,
    InitList,
    CompoundLit,
    Opaque,     // statement expressions, offsetof, va_arg
};

struct Expr {
    ExprKind kind = ExprKind::Opaque;
    std::string text;
    std::vector<std::unique_ptr<Expr>> kids;
    CType type;
    bool arrow = false;
    int line = 0;
    int column = 0;

    const Expr* kid(std::size_t i) const { return i < kids.size() ? kids[i].get() : nullptr; }
    /// Name of a directly called function, empty for indirect calls.
    std::string callee_name() const;
    /// Rough source rendering used in diagnostic messages.
    std::string sketch() const;
};

struct Declarator {
    std::string name;
    CType type;
    std::unique_ptr<Expr> init;
    int line = 0;
    int column = 0;
};

enum class StmtKind {
    Compound,
    Decl,
    Expr,
    If,
    While,
    DoWhile,
    For,
    Switch,
    Case,
    Default,
    Break,
    Continue,
    Return,
    Goto,
    Label,
    Empty,
    Opaque,
    CamlParam,
    CamlLocal,
    CamlReturn,
};

struct Stmt {
    StmtKind kind = StmtKind::Empty;
    int line = 0;
    int column = 0;
    /// Condition, expression statement, return value or case value.
    std::unique_ptr<Expr> expr;
    std::unique_ptr<Stmt> body;
    std::unique_ptr<Stmt> else_body;
    std::unique_ptr<Stmt> init;
    std::unique_ptr<Expr> step;
    std::vector<std::unique_ptr<Stmt>> children;
    std::vector<Declarator> decls;
    /// Label or goto target; macro name for CAML statements.
    std::string name;
    /// Registered names of CAMLparam / CAMLxparam / CAMLlocal.
    std::vector<std::string> names;
    int count = 0;
    bool xparam = false;
};

struct Variable {
    std::string name;
    CType type;
    int line = 0;
    int column = 0;
};

enum class VarScope { Param, Local, Global, UnknownExtern };

struct StubFunction {
    std::string name;
    CType return_type;
    std::vector<Variable> params;
    std::vector<Variable> locals;
    std::unique_ptr<Stmt> body;
    int line = 0;
    int column = 0;
    bool is_camlprim = false;
    bool is_static = false;
    /// Declared with an explicit `(void)` parameter list.
    bool void_params = false;
    bool variadic = false;
    /// Body could not be parsed; `body` is null.
    bool parse_failed = false;
    /// File-scope variables declared before the definition.
    std::vector<Variable> globals;

    VarScope scope_of(const std::string& var) const;
    const CType* type_of(const std::string& var) const;
    std::size_t value_param_count() const;
};

struct StubUnit {
    std::string file;
    std::vector<StubFunction> functions;
    /// Prototypes without a body.
    std::vector<StubFunction> declarations;
    std::vector<Variable> globals;
    std::map<std::string, CType> typedefs;
    std::map<std::string, MacroDef> local_macros;
    std::vector<std::string> includes;
    /// Notes, unsupported constructs and per-function fatal parse errors.
    std::vector<Diagnostic> diagnostics;
    /// Set when the whole unit could not be parsed.
    std::optional<Diagnostic> fatal;

    const StubFunction* find_function(const std::string& name) const;
};

/// Preprocesses and parses one C file. Throws CParseError only for errors
/// that prevent any parsing (lexing and preprocessing failures); errors
/// inside a function body are recorded and parsing continues.
StubUnit parse_unit(std::string_view source, std::string_view file);

/// Parses an already preprocessed token stream.
StubUnit parse_tokens(const PreprocessResult& pre, std::string_view file);

} // namespace stublint
