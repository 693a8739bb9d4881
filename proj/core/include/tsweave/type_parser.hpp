#pragma once

#include <string_view>
#include <vector>

#include "tsweave/token.hpp"

namespace tsweave::ts {

// Parses one TypeScript type expression starting at tokens[start]. Returns
// the index one past the last consumed token, or -1 when no type can be
// parsed there. Parsing is greedy: unions, intersections, generics, object
// and tuple types, function and constructor types, conditional types, type
// operators, and template literal types are all consumed as far as the
// grammar allows. A parse that would end in the middle of a multi-character
// `>` token (e.g. `A<B` out of `A<B>>`) is rejected because the boundary is
// not representable as a token index.
int parse_type_tokens(const std::vector<js::Token>& tokens, int start);

// True when `text` lexes cleanly and parses as exactly one complete type
// expression with no tokens left over. Comments and line terminators make
// the text unsafe to embed as a single-line annotation, so they are
// rejected even though the grammar alone would accept them.
bool parses_as_type(std::string_view text);

}  // namespace tsweave::ts
