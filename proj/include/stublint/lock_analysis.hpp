#pragma once

#include "stublint/cfg.hpp"
#include "stublint/diagnostic.hpp"
#include "stublint/summaries.hpp"

#include <optional>
#include <vector>

namespace stublint {

/// State of the OCaml runtime lock. Bottom < Held, Released < Unknown.
enum class LockState { Bottom, Held, Released, Unknown };

inline constexpr std::array<LockState, 4> all_lock_states{
    LockState::Bottom, LockState::Held, LockState::Released, LockState::Unknown};

std::string_view to_string(LockState s);
LockState join(LockState a, LockState b);
bool leq(LockState a, LockState b);

enum class LockIntrinsic { EnterBlocking, LeaveBlocking };

/// Result of one lock operation: the out-state and, when the operation
/// was applied in the wrong state, the severity of the UNBALANCED_LOCK
/// diagnostic.
struct LockStep {
    LockState state = LockState::Bottom;
    std::optional<Severity> unbalanced;
};

LockStep apply_intrinsic(LockIntrinsic op, LockState in);

/// Effect of calling `name` in state `in`.
LockStep apply_call(std::string_view name, LockState in, const Summaries& summaries);

/// True when a call to `name` lets the collector run: `may_gc` summaries
/// and any release of the runtime lock.
bool is_gc_point(std::string_view name, const Summaries& summaries);

struct TransferResult {
    LockState state = LockState::Bottom;
    std::vector<Diagnostic> diags;
    bool gc_point = false;
};

TransferResult transfer(const Cfg& cfg, const CfgNode& node, LockState in, const Summaries& summaries,
                        const std::string& file);

struct LockMap {
    /// State before each node executes, indexed by node id.
    std::vector<LockState> in;
    std::vector<LockState> out;
    /// Join of the states reaching the exit and every return.
    LockState exit_state = LockState::Bottom;
    int iterations = 0;
};

LockMap solve(const Cfg& cfg, const Summaries& summaries);

/// UNBALANCED_LOCK diagnostics at reachable nodes, given a solved map.
std::vector<Diagnostic> lock_diagnostics(const Cfg& cfg, const LockMap& map, const Summaries& summaries,
                                         const std::string& file);

} // namespace stublint
