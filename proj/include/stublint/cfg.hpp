#pragma once

#include "stublint/c_ast.hpp"
#include "stublint/summaries.hpp"

#include <vector>

namespace stublint {

enum class NodeKind {
    Entry,
    Exit,
    Expr,
    Decl,
    Branch,
    Return,
    CamlParam,
    CamlLocal,
    CamlReturn,
    Opaque,
    Goto,
    Label,
};

std::string_view to_string(NodeKind kind);

struct CfgNode {
    int id = 0;
    NodeKind kind = NodeKind::Expr;
    const Stmt* stmt = nullptr;
    /// Expression evaluated by the node: statement expression, branch
    /// condition, case value or returned value. May be null.
    const Expr* expr = nullptr;
    /// Set for Decl nodes.
    const Declarator* decl = nullptr;
    int line = 0;
    int column = 0;
    std::vector<int> succs;
    std::vector<int> preds;
    bool reachable = false;
    /// Calls a `noreturn` function; has no successors.
    bool noreturn = false;
};

struct Cfg {
    const StubFunction* fn = nullptr;
    std::vector<CfgNode> nodes;
    int entry = 0;
    int exit = 1;
    /// Nodes that leave the function without falling off the end:
    /// returns, CAMLreturn and calls to noreturn functions.
    std::vector<int> exits;
    bool returns_to_ocaml = false;

    std::size_t statement_node_count() const { return nodes.size() - 2; }
    std::size_t edge_count() const;
};

/// Lowers a parsed function body. Functions whose body failed to parse
/// yield an entry connected directly to the exit.
Cfg build_cfg(const StubFunction& fn, const Summaries& summaries);

/// Calls in `e` in evaluation order: arguments before the call itself,
/// right-hand side of an assignment before its left-hand side. Operands of
/// `sizeof` are not evaluated.
void collect_calls(const Expr* e, std::vector<const Expr*>& out);

} // namespace stublint
