#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stublint {

enum class Effect : unsigned {
    AcquiresLock = 1U << 0,
    ReleasesLock = 1U << 1,
    RequiresLock = 1U << 2,
    NoLockNeeded = 1U << 3,
    MayGc = 1U << 4,
    Noreturn = 1U << 5,
};

std::string_view to_string(Effect effect);

struct SummaryEntry {
    /// Function name, or prefix when `prefix` is set (written `caml_*`).
    std::string pattern;
    bool prefix = false;
    unsigned effects = 0;
    int line = 0;

    bool has(Effect e) const { return (effects & static_cast<unsigned>(e)) != 0; }
    bool operator==(const SummaryEntry&) const = default;
};

class SummaryLoadError : public std::runtime_error {
public:
    SummaryLoadError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Parses the line format `name[*]: effect[, effect]*` with `#` comments.
std::vector<SummaryEntry> load_summaries(std::string_view text);

/// Text of the built-in table, in the same format `load_summaries` reads.
std::string_view builtin_summary_text();

class Summaries {
public:
    /// Table holding only the built-in entries.
    static Summaries defaults();

    /// Later entries override earlier ones with the same pattern.
    void add(const std::vector<SummaryEntry>& entries);
    void add(const SummaryEntry& entry);

    /// Exact name beats any prefix; among prefixes the longest wins.
    const SummaryEntry* lookup(std::string_view name) const;
    unsigned effects_of(std::string_view name) const;
    bool has(std::string_view name, Effect e) const;
    bool has_exact(std::string_view name) const;

private:
    std::map<std::string, SummaryEntry, std::less<>> exact_;
    std::map<std::string, SummaryEntry, std::less<>> prefixes_;
};

} // namespace stublint
