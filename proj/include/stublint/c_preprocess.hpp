//===- c_preprocess.hpp -----------------------------------------------===//
//
//  File-local preprocessing. System and project headers are never read;
//  only `#define`s written in the analyzed file are expanded, one level,
//  and conditional blocks are resolved by assuming every guard that is not
//  defined in this file is undefined.
//
//===------------------------------------------------------------------===//

#pragma once

#include "stublint/c_lexer.hpp"
#include "stublint/diagnostic.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stublint {

struct MacroDef {
    std::string name;
    bool function_like = false;
    bool variadic = false;
    std::vector<std::string> params;
    std::vector<Token> body;
    int line = 0;

    bool operator==(const MacroDef&) const = default;
};

struct PreprocessResult {
    /// Expanded token stream. Tokens produced by an expansion carry the
    /// location of the macro name at the use site.
    std::vector<Token> tokens;
    /// Every macro defined in the file, last definition wins.
    std::map<std::string, MacroDef> macros;
    std::vector<std::string> includes;
    std::vector<Diagnostic> notes;

    /// Tokens rendered back to text, one output line per source line.
    std::string text() const;
};

/// Throws CParseError for recursive macros and unterminated `#define`
/// continuations.
PreprocessResult preprocess_local(std::string_view source, std::string_view file);

} // namespace stublint
