#pragma once

#include "stublint/cfg.hpp"
#include "stublint/diagnostic.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stublint {

/// Variables with a known constant value. A variable that is absent is
/// unknown; an unreachable point has no environment at all.
using ConstEnv = std::map<std::string, long long>;

ConstEnv join(const ConstEnv& a, const ConstEnv& b);

std::optional<long long> eval_const(const Expr* e, const ConstEnv& env);

struct ConstMap {
    /// Environment before each node; nullopt when unreachable.
    std::vector<std::optional<ConstEnv>> in;
    /// Variables whose address is taken; never treated as constant.
    std::set<std::string> address_taken;
};

ConstMap propagate_constants(const Cfg& cfg);

std::vector<Diagnostic> check_naked(const Cfg& cfg, const ConstMap& consts, const std::string& file);

} // namespace stublint
