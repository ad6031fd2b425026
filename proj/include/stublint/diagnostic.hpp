//===- diagnostic.hpp -------------------------------------------------===//
//
//  Source locations, rule identifiers and the diagnostic record shared by
//  every analysis pass.
//
//===------------------------------------------------------------------===//

#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stublint {

struct SourceLoc {
    std::string file;
    int line = 0;
    int column = 0;

    auto operator<=>(const SourceLoc&) const = default;
};

enum class Severity { Note, Warning, Error };

enum class RuleId {
    ArityMismatch,
    VoidStub,
    ValueDerefUnlocked,
    RuntimeCallUnlocked,
    DerivedPtrStale,
    MissingCamlparam,
    CamlparamArity,
    NakedPointer,
    UnbalancedLock,
    UnsupportedConstruct,
    Note,
};

inline constexpr std::array<RuleId, 11> all_rules{
    RuleId::ArityMismatch,        RuleId::VoidStub,
    RuleId::ValueDerefUnlocked,   RuleId::RuntimeCallUnlocked,
    RuleId::DerivedPtrStale,      RuleId::MissingCamlparam,
    RuleId::CamlparamArity,       RuleId::NakedPointer,
    RuleId::UnbalancedLock,       RuleId::UnsupportedConstruct,
    RuleId::Note,
};

std::string_view to_string(RuleId rule);
std::string_view to_string(Severity severity);
std::optional<RuleId> rule_from_string(std::string_view text);

/// One-line description used for the SARIF rules table.
std::string_view rule_description(RuleId rule);

struct Diagnostic {
    RuleId rule = RuleId::Note;
    Severity severity = Severity::Note;
    SourceLoc loc;
    std::string message;
    std::optional<SourceLoc> related;

    bool operator==(const Diagnostic&) const = default;
};

Diagnostic make_diag(RuleId rule,
                     Severity severity,
                     SourceLoc loc,
                     std::string message);

/// Order by file, line, column, then rule and message. Used everywhere a
/// report is produced so that output does not depend on traversal order.
bool diag_less(const Diagnostic& a, const Diagnostic& b);

void sort_diagnostics(std::vector<Diagnostic>& diags);

/// `file:line:col: severity: RULE_ID: message`
std::string format_text(const Diagnostic& d);

} // namespace stublint
