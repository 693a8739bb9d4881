#ifndef TSWEAVE_TOKEN_HPP
#define TSWEAVE_TOKEN_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tsweave::js {

// Lines are 1-based, columns are 0-based and counted in Unicode code points.
struct Position {
    int line = 1;
    int col = 0;

    bool operator==(const Position&) const = default;
    auto operator<=>(const Position&) const = default;
};

// Half-open span: `end` is the position one past the final character.
struct Span {
    Position start;
    Position end;

    bool operator==(const Span&) const = default;
};

enum class TokenKind {
    Identifier,
    Keyword,
    Punctuator,
    Numeric,
    String,
    Template,
    Regex,
    Boolean,
    Null,
};

std::string_view to_string(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::Identifier;
    std::string text;     // exact source slice
    std::string leading;  // whitespace and comments preceding the token
    Span span;
    size_t offset = 0;           // byte offset of `text` within the file
    bool newlineBefore = false;  // a line terminator occurs in `leading`

    bool is(TokenKind k) const { return kind == k; }
    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
    bool isPunct(std::string_view t) const { return is(TokenKind::Punctuator, t); }
    bool isKeyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
    bool isIdent(std::string_view t) const { return is(TokenKind::Identifier, t); }
};

// The full tokenization of one file. Concatenating `leading + text` over all
// tokens, followed by `eofTrivia`, reproduces `text` byte for byte.
struct TokenFile {
    std::string text;
    std::vector<Token> tokens;
    std::string eofTrivia;
    Position eofPos;
    size_t eofOffset = 0;  // byte offset where eofTrivia begins
};

}  // namespace tsweave::js

#endif
