#ifndef TSWEAVE_LEXER_HPP
#define TSWEAVE_LEXER_HPP

#include <stdexcept>
#include <string>

#include "tsweave/token.hpp"

namespace tsweave::js {

struct LexError : std::runtime_error {
    LexError(Position p, size_t byteOffset, const std::string& msg)
        : std::runtime_error("lex error at " + std::to_string(p.line) + ":" +
                             std::to_string(p.col) + ": " + msg),
          pos(p),
          offset(byteOffset) {}
    Position pos;
    size_t offset;  // byte offset of the error within the source
};

// Tokenizes ECMAScript source (plus the TypeScript token set; annotations are
// punctuators and identifiers, so no separate mode is needed). Throws LexError
// on malformed input such as an unterminated string, template, regex, or
// block comment.
TokenFile lex(std::string_view source);

bool is_reserved_word(std::string_view word);

}  // namespace tsweave::js

#endif
