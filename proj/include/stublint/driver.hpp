#pragma once

#include "stublint/diagnostic.hpp"
#include "stublint/ml_externals.hpp"
#include "stublint/summaries.hpp"

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace stublint {

struct SourceFile {
    std::string path;
    std::string text;
};

struct AnalysisOptions {
    std::set<RuleId> disabled;
};

struct AnalysisResult {
    /// Sorted, duplicate-free, with disabled rules removed.
    std::vector<Diagnostic> diagnostics;
    /// Declarations from every OCaml input, duplicates across `.ml` and
    /// `.mli` removed, in input order.
    std::vector<ExternalDecl> decls;
    /// An input could not be parsed: malformed `external`, unlexable C or a
    /// function body that failed to parse.
    bool fatal = false;

    std::size_t count(Severity s) const;
};

AnalysisResult analyze(const std::vector<SourceFile>& ml_inputs, const std::vector<SourceFile>& c_inputs,
                       const Summaries& summaries, const AnalysisOptions& options = {});

/// Exit status of `check`: 2 on fatal input errors, 1 when errors (or, when
/// `strict`, warnings) remain, 0 otherwise.
int exit_status(const AnalysisResult& result, bool strict);

/// Command-line entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace stublint
