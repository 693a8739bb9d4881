#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "tsweave/ast.hpp"

namespace tsweave::js {

struct ParseError : std::runtime_error {
    ParseError(Position p, const std::string& msg)
        : std::runtime_error("parse error at " + std::to_string(p.line) + ":" +
                             std::to_string(p.col) + ": " + msg),
          pos(p) {}
    Position pos;
};

// Parses a program (script or module) into an Ast that owns the token file.
// Accepts the TypeScript annotation subset produced by the weaver: `: T` on
// variable declarators, parameters, property definitions, and function
// results. Throws ParseError or LexError.
Ast parse_program(std::string_view source);
Ast parse_program(TokenFile tokens);

// Convenience: true when `source` lexes and parses.
bool parses(std::string_view source);

}  // namespace tsweave::js
