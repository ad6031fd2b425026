#pragma once

#include "stublint/c_ast.hpp"
#include "stublint/cfg.hpp"
#include "stublint/driver.hpp"
#include "stublint/lock_analysis.hpp"
#include "stublint/summaries.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path corpus_dir() {
    return STUBLINT_CORPUS_DIR;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::filesystem::path> corpus_cases(const std::string& side) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir() / side)) {
        if (e.is_directory()) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// One parsed function with its CFG and lock map. Keeps the unit alive.
struct Analyzed {
    stublint::StubUnit unit;
    stublint::Summaries summaries = stublint::Summaries::defaults();
    const stublint::StubFunction* fn = nullptr;
    stublint::Cfg cfg;
    stublint::LockMap locks;
};

inline std::unique_ptr<Analyzed> analyze_fn(const std::string& source, const std::string& name) {
    auto a = std::make_unique<Analyzed>();
    a->unit = stublint::parse_unit(source, "t.c");
    a->fn = a->unit.find_function(name);
    if (a->fn != nullptr) {
        a->cfg = stublint::build_cfg(*a->fn, a->summaries);
        a->locks = stublint::solve(a->cfg, a->summaries);
    }
    return a;
}

inline stublint::AnalysisResult analyze_texts(const std::string& ml, const std::string& c) {
    std::vector<stublint::SourceFile> mls;
    if (!ml.empty()) {
        mls.push_back({"t.ml", ml});
    }
    return stublint::analyze(mls, {{"t.c", c}}, stublint::Summaries::defaults());
}

inline std::vector<std::string> rules_and_lines(const std::vector<stublint::Diagnostic>& diags) {
    std::vector<std::string> out;
    for (const auto& d : diags) {
        if (d.severity != stublint::Severity::Note) {
            out.push_back(std::string(stublint::to_string(d.rule)) + "@" + std::to_string(d.loc.line));
        }
    }
    return out;
}

} // namespace testing
