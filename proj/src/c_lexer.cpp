#include "stublint/c_lexer.hpp"

#include <array>
#include <cctype>

namespace stublint {

namespace {

constexpr std::array<std::string_view, 23> multi_char_puncts{
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##",
};

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

} // namespace

std::vector<Token> lex_c(std::string_view src, int first_line, int first_column) {
    std::vector<Token> out;
    std::size_t pos = 0;
    int line = first_line;
    int col = first_column;

    auto peek = [&](std::size_t ahead = 0) -> char {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    };
    auto advance = [&]() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    };

    while (pos < src.size()) {
        char c = peek();
        if (c == '\\' && (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n'))) {
            advance();
            if (peek() == '\r') {
                advance();
            }
            advance();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            advance();
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (pos < src.size() && peek() != '\n') {
                advance();
            }
            continue;
        }
        if (c == '/' && peek(1) == '*') {
            int start_line = line;
            int start_col = col;
            advance();
            advance();
            while (pos < src.size() && !(peek() == '*' && peek(1) == '/')) {
                advance();
            }
            if (pos >= src.size()) {
                throw CParseError(start_line, start_col, "unterminated comment");
            }
            advance();
            advance();
            continue;
        }

        Token t;
        t.line = line;
        t.column = col;

        // Encoding prefixes on string and char literals.
        std::size_t prefix = 0;
        if (c == 'L' || c == 'U' || c == 'u') {
            prefix = (c == 'u' && peek(1) == '8') ? 2 : 1;
            if (peek(prefix) != '"' && peek(prefix) != '\'') {
                prefix = 0;
            }
        }

        char q = peek(prefix);
        if ((prefix > 0 || c == '"' || c == '\'') && (q == '"' || q == '\'')) {
            for (std::size_t i = 0; i < prefix; ++i) {
                t.text += peek();
                advance();
            }
            t.kind = q == '"' ? TokKind::String : TokKind::Char;
            t.text += q;
            advance();
            while (true) {
                if (pos >= src.size() || peek() == '\n') {
                    throw CParseError(t.line, t.column,
                                      q == '"' ? "unterminated string literal"
                                               : "unterminated character literal");
                }
                char d = peek();
                t.text += d;
                advance();
                if (d == '\\') {
                    t.text += peek();
                    advance();
                } else if (d == q) {
                    break;
                }
            }
        } else if (ident_start(c)) {
            t.kind = TokKind::Ident;
            while (ident_char(peek())) {
                t.text += peek();
                advance();
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) != 0
                   || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))) != 0)) {
            t.kind = TokKind::Number;
            while (true) {
                char d = peek();
                if (std::isalnum(static_cast<unsigned char>(d)) != 0 || d == '.' || d == '_') {
                    t.text += d;
                    advance();
                    if ((d == 'e' || d == 'E' || d == 'p' || d == 'P')
                        && (peek() == '+' || peek() == '-')) {
                        t.text += peek();
                        advance();
                    }
                } else {
                    break;
                }
            }
        } else {
            t.kind = TokKind::Punct;
            for (auto p : multi_char_puncts) {
                if (src.substr(pos, p.size()) == p) {
                    t.text = std::string(p);
                    break;
                }
            }
            if (t.text.empty()) {
                t.text = std::string(1, c);
            }
            for (std::size_t i = 0; i < t.text.size(); ++i) {
                advance();
            }
        }
        out.push_back(std::move(t));
    }

    Token eof;
    eof.kind = TokKind::Eof;
    eof.line = line;
    eof.column = col;
    out.push_back(eof);
    return out;
}

} // namespace stublint
