#pragma once

#include <string>
#include <vector>

#include "tsweave/token.hpp"

namespace tsweave::js {

// One splice against a token stream: tokens [first, end) are replaced by
// `text`. The leading trivia of token `first` is kept in front of `text`
// when keepLeading is set (the default), so comments and indentation that
// precede a rewritten construct survive. An insertion is a splice with
// first == end; it lands after the previous token's text and before the
// leading trivia of token `first`... unless beforeTrivia is false, in which
// case it lands after that trivia, immediately before the token itself.
struct TokenSplice {
    int first = 0;
    int end = 0;
    std::string text;
    bool keepLeading = true;
    bool beforeTrivia = false;

    static TokenSplice replace(int first, int end, std::string text) {
        return TokenSplice{first, end, std::move(text), true, false};
    }
    // Insert immediately after token `index` (before the next token's trivia).
    static TokenSplice insert_after(int index, std::string text) {
        return TokenSplice{index + 1, index + 1, std::move(text), true, true};
    }
    // Insert immediately before token `index`, after its leading trivia.
    static TokenSplice insert_before(int index, std::string text) {
        return TokenSplice{index, index, std::move(text), true, false};
    }
    // Drop tokens [first, end) together with their leading trivia.
    static TokenSplice remove(int first, int end) {
        return TokenSplice{first, end, "", false, false};
    }
};

// Applies splices to the token stream and returns the rewritten source text.
// Splices must be non-overlapping; they are sorted internally. Insertions at
// the same index apply in argument order. Throws std::invalid_argument on
// overlap or out-of-range indices.
std::string apply_splices(const TokenFile& file, std::vector<TokenSplice> splices);

}  // namespace tsweave::js
