#include "tsweave/token_edit.hpp"

#include <algorithm>
#include <stdexcept>

namespace tsweave::js {

std::string apply_splices(const TokenFile& file, std::vector<TokenSplice> splices) {
    const int n = static_cast<int>(file.tokens.size());
    for (const TokenSplice& s : splices) {
        if (s.first < 0 || s.end < s.first || s.end > n) {
            throw std::invalid_argument("splice out of range");
        }
    }
    std::stable_sort(splices.begin(), splices.end(),
                     [](const TokenSplice& a, const TokenSplice& b) {
                         if (a.first != b.first) return a.first < b.first;
                         // Pre-trivia insertions sort ahead at the same index.
                         return a.beforeTrivia && !b.beforeTrivia;
                     });
    for (size_t i = 1; i < splices.size(); i++) {
        if (splices[i].first < splices[i - 1].end) {
            throw std::invalid_argument("overlapping splices");
        }
    }

    std::string out;
    out.reserve(file.text.size());
    size_t next = 0;
    int i = 0;
    while (i <= n) {
        // Insertions before the leading trivia of token i.
        while (next < splices.size() && splices[next].first == i &&
               splices[next].beforeTrivia && splices[next].end == i) {
            out += splices[next].text;
            next++;
        }
        if (i == n) break;
        // A replacement starting here consumes [first, end).
        if (next < splices.size() && splices[next].first == i && splices[next].end > i) {
            const TokenSplice& s = splices[next];
            if (s.keepLeading) out += file.tokens[static_cast<size_t>(i)].leading;
            out += s.text;
            i = s.end;
            next++;
            continue;
        }
        out += file.tokens[static_cast<size_t>(i)].leading;
        // Insertions after the trivia, directly before the token text; also
        // zero-width replacements (pure insertions by `insert_before`).
        while (next < splices.size() && splices[next].first == i &&
               splices[next].end == i && !splices[next].beforeTrivia) {
            out += splices[next].text;
            next++;
        }
        out += file.tokens[static_cast<size_t>(i)].text;
        i++;
    }
    out += file.eofTrivia;
    return out;
}

}  // namespace tsweave::js
