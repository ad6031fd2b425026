#pragma once

#include "stublint/c_ast.hpp"
#include "stublint/ml_externals.hpp"

#include <vector>

namespace stublint {

/// Compares every declaration against the C definition of the same symbol
/// found in any of `units`. Symbols defined nowhere produce a note.
std::vector<Diagnostic> check_arity(const std::vector<ExternalDecl>& decls,
                                    const std::vector<const StubUnit*>& units);

std::vector<Diagnostic> check_arity(const std::vector<ExternalDecl>& decls, const StubUnit& unit);

} // namespace stublint
