#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stublint {

enum class TokKind { Ident, Number, String, Char, Punct, Eof };

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;
    int line = 1;
    int column = 1;

    bool is(std::string_view s) const {
        return (kind == TokKind::Punct || kind == TokKind::Ident) && text == s;
    }
    bool operator==(const Token&) const = default;
};

/// Raised by the C lexer, preprocessor and parser for errors that stop
/// processing of the current unit or function.
class CParseError : public std::runtime_error {
public:
    CParseError(int line, int column, const std::string& message)
        : std::runtime_error(message), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Tokenizes C source. `first_line` positions tokens of a fragment (e.g. a
/// macro body) at their original line. Comments must already be removed or
/// are skipped here; backslash-newline is treated as whitespace. The result
/// always ends with an Eof token.
std::vector<Token> lex_c(std::string_view text, int first_line = 1, int first_column = 1);

} // namespace stublint
