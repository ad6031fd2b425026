#pragma once

#include "stublint/ml_externals.hpp"

#include <string>
#include <vector>

namespace stublint {

/// C caller model for external analyzers: one pthread entry point per
/// primitive that calls every C stub of that primitive with nondeterministic
/// arguments while holding `__VERIFIER_ocaml_runtime_lock`, and a `main`
/// that spawns all of them. Expects the generated header to be included
/// first so that every called stub has a prototype.
std::string generate_main(const std::vector<ExternalDecl>& decls);

} // namespace stublint
