#pragma once

#include "stublint/cfg.hpp"
#include "stublint/lock_analysis.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stublint {

enum class FactKind { Plain, OcamlValue, HeapDerived };

struct ValueFact {
    FactKind kind = FactKind::Plain;
    /// Meaningful for HeapDerived only.
    bool stale = false;

    bool operator==(const ValueFact&) const = default;
};

std::string to_string(const ValueFact& f);

/// May-join: HeapDerived wins and staleness is OR-combined.
ValueFact join(const ValueFact& a, const ValueFact& b);

using FactEnv = std::map<std::string, ValueFact>;

enum class DerefKind { ValueMacroDeref, ExplicitDeref, RuntimeCall };

struct DerefEvent {
    int line = 0;
    int column = 0;
    DerefKind kind = DerefKind::ExplicitDeref;
    /// Dereferenced expression, or the called function for runtime calls.
    std::string subject;
    ValueFact fact;
    LockState lock = LockState::Held;
    int node = 0;
};

struct ValueTrack {
    /// Facts before each node; nullopt for unreachable nodes.
    std::vector<std::optional<FactEnv>> in;
    std::vector<DerefEvent> events;
    /// Value variables whose address escapes to an unknown function.
    std::set<std::string> degraded;
    std::vector<Diagnostic> notes;
};

ValueTrack track_values(const Cfg& cfg, const LockMap& locks, const Summaries& summaries,
                        const std::string& file);

std::vector<Diagnostic> check_deref_safety(const std::vector<DerefEvent>& events, const std::string& file);

/// MISSING_CAMLPARAM and CAMLPARAM_ARITY. Only applies to functions with
/// `is_camlprim` set.
std::vector<Diagnostic> check_camlparam(const StubFunction& fn, const std::string& file);

} // namespace stublint
