#include "stublint/summaries.hpp"

#include <array>
#include <utility>

namespace stublint {

namespace {

constexpr std::array<std::pair<std::string_view, Effect>, 6> effect_names{{
    {"acquires_lock", Effect::AcquiresLock},
    {"releases_lock", Effect::ReleasesLock},
    {"requires_lock", Effect::RequiresLock},
    {"no_lock_needed", Effect::NoLockNeeded},
    {"may_gc", Effect::MayGc},
    {"noreturn", Effect::Noreturn},
}};

constexpr std::string_view builtin_text = R"(# runtime functions need the lock and may trigger a collection
caml_*: requires_lock, may_gc
caml_enter_blocking_section: releases_lock
caml_leave_blocking_section: acquires_lock
caml_release_runtime_system: releases_lock
caml_acquire_runtime_system: acquires_lock
caml_stat_free: no_lock_needed
caml_stat_alloc: no_lock_needed
caml_stat_strdup: no_lock_needed
caml_alloc_custom: requires_lock, may_gc
caml_failwith: requires_lock, noreturn
caml_invalid_argument: requires_lock, noreturn
caml_raise*: requires_lock, noreturn
caml_array_bound_error: requires_lock, noreturn
caml_string_length: requires_lock
caml_named_value: requires_lock
caml_register_global_root: requires_lock
caml_remove_global_root: requires_lock
caml_register_generational_global_root: requires_lock
caml_remove_generational_global_root: requires_lock
caml_modify: requires_lock
caml_initialize: requires_lock
failwith_xc: requires_lock, noreturn
)";

std::string_view trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string_view to_string(Effect effect) {
    for (const auto& [name, e] : effect_names) {
        if (e == effect) {
            return name;
        }
    }
    return "?";
}

std::vector<SummaryEntry> load_summaries(std::string_view text) {
    std::vector<SummaryEntry> out;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw SummaryLoadError(line_no, "expected 'name: effect, ...'");
        }
        SummaryEntry entry;
        entry.line = line_no;
        std::string_view name = trim(line.substr(0, colon));
        if (!name.empty() && name.back() == '*') {
            entry.prefix = true;
            name.remove_suffix(1);
        }
        if (name.empty() && !entry.prefix) {
            throw SummaryLoadError(line_no, "missing function name");
        }
        entry.pattern = std::string(name);

        std::string_view rest = line.substr(colon + 1);
        while (!rest.empty()) {
            std::size_t comma = rest.find(',');
            std::string_view word = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            if (word.empty()) {
                continue;
            }
            bool known = false;
            for (const auto& [ename, e] : effect_names) {
                if (ename == word) {
                    entry.effects |= static_cast<unsigned>(e);
                    known = true;
                }
            }
            if (!known) {
                throw SummaryLoadError(line_no, "unknown effect '" + std::string(word) + "'");
            }
        }
        if (entry.has(Effect::AcquiresLock) && entry.has(Effect::ReleasesLock)) {
            throw SummaryLoadError(line_no, "acquires_lock and releases_lock are exclusive");
        }
        if (entry.has(Effect::RequiresLock) && entry.has(Effect::NoLockNeeded)) {
            throw SummaryLoadError(line_no, "requires_lock and no_lock_needed are exclusive");
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::string_view builtin_summary_text() {
    return builtin_text;
}

Summaries Summaries::defaults() {
    Summaries s;
    s.add(load_summaries(builtin_text));
    return s;
}

void Summaries::add(const std::vector<SummaryEntry>& entries) {
    for (const auto& e : entries) {
        add(e);
    }
}

void Summaries::add(const SummaryEntry& entry) {
    auto& table = entry.prefix ? prefixes_ : exact_;
    table[entry.pattern] = entry;
}

const SummaryEntry* Summaries::lookup(std::string_view name) const {
    if (auto it = exact_.find(name); it != exact_.end()) {
        return &it->second;
    }
    const SummaryEntry* best = nullptr;
    for (const auto& [pattern, entry] : prefixes_) {
        if (name.substr(0, pattern.size()) == pattern
            && (best == nullptr || pattern.size() > best->pattern.size())) {
            best = &entry;
        }
    }
    return best;
}

unsigned Summaries::effects_of(std::string_view name) const {
    const SummaryEntry* e = lookup(name);
    return e == nullptr ? 0U : e->effects;
}

bool Summaries::has(std::string_view name, Effect e) const {
    return (effects_of(name) & static_cast<unsigned>(e)) != 0;
}

bool Summaries::has_exact(std::string_view name) const {
    return exact_.count(name) != 0;
}

} // namespace stublint
