#include "stublint/diagnostic.hpp"

#include <algorithm>
#include <tuple>

namespace stublint {

std::string_view to_string(RuleId rule) {
    switch (rule) {
        case RuleId::ArityMismatch: return "ARITY_MISMATCH";
        case RuleId::VoidStub: return "VOID_STUB";
        case RuleId::ValueDerefUnlocked: return "VALUE_DEREF_UNLOCKED";
        case RuleId::RuntimeCallUnlocked: return "RUNTIME_CALL_UNLOCKED";
        case RuleId::DerivedPtrStale: return "DERIVED_PTR_STALE";
        case RuleId::MissingCamlparam: return "MISSING_CAMLPARAM";
        case RuleId::CamlparamArity: return "CAMLPARAM_ARITY";
        case RuleId::NakedPointer: return "NAKED_POINTER";
        case RuleId::UnbalancedLock: return "UNBALANCED_LOCK";
        case RuleId::UnsupportedConstruct: return "UNSUPPORTED_CONSTRUCT";
        case RuleId::Note: return "NOTE";
    }
    return "NOTE";
}

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::Note: return "note";
        case Severity::Warning: return "warning";
        case Severity::Error: return "error";
    }
    return "note";
}

std::optional<RuleId> rule_from_string(std::string_view text) {
    for (RuleId r : all_rules) {
        if (to_string(r) == text) {
            return r;
        }
    }
    return std::nullopt;
}

std::string_view rule_description(RuleId rule) {
    switch (rule) {
        case RuleId::ArityMismatch:
            return "C stub parameter count does not match the OCaml external "
                   "declaration";
        case RuleId::VoidStub:
            return "C stub declared with (void) but OCaml always passes at "
                   "least one argument";
        case RuleId::ValueDerefUnlocked:
            return "OCaml value dereferenced without holding the runtime lock";
        case RuleId::RuntimeCallUnlocked:
            return "OCaml runtime function called without holding the runtime "
                   "lock";
        case RuleId::DerivedPtrStale:
            return "C pointer into an OCaml block dereferenced after a point "
                   "where the GC may have moved the block";
        case RuleId::MissingCamlparam:
            return "Function with value parameters or locals does not begin "
                   "with CAMLparam";
        case RuleId::CamlparamArity:
            return "CAMLparam registers a different number of values than the "
                   "function has value parameters";
        case RuleId::NakedPointer:
            return "Statically known naked pointer stored into an OCaml value";
        case RuleId::UnbalancedLock:
            return "Unbalanced runtime lock release/acquire";
        case RuleId::UnsupportedConstruct:
            return "Construct outside the analyzed C subset";
        case RuleId::Note:
            return "Informational note";
    }
    return "";
}

Diagnostic make_diag(RuleId rule,
                     Severity severity,
                     SourceLoc loc,
                     std::string message) {
    Diagnostic d;
    d.rule = rule;
    d.severity = severity;
    d.loc = std::move(loc);
    d.message = std::move(message);
    return d;
}

bool diag_less(const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.loc.file, a.loc.line, a.loc.column, a.rule, a.message)
         < std::tie(b.loc.file, b.loc.line, b.loc.column, b.rule, b.message);
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), diag_less);
}

std::string format_text(const Diagnostic& d) {
    std::string out = d.loc.file;
    out += ':';
    out += std::to_string(d.loc.line);
    out += ':';
    out += std::to_string(d.loc.column);
    out += ": ";
    out += to_string(d.severity);
    out += ": ";
    out += to_string(d.rule);
    out += ": ";
    out += d.message;
    return out;
}

} // namespace stublint
