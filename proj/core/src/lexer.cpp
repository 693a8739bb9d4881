#include "tsweave/lexer.hpp"

#include <array>
#include <cstring>
#include <unordered_set>

namespace tsweave::js {

std::string_view to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Identifier: return "Identifier";
        case TokenKind::Keyword: return "Keyword";
        case TokenKind::Punctuator: return "Punctuator";
        case TokenKind::Numeric: return "Numeric";
        case TokenKind::String: return "String";
        case TokenKind::Template: return "Template";
        case TokenKind::Regex: return "RegularExpression";
        case TokenKind::Boolean: return "Boolean";
        case TokenKind::Null: return "Null";
    }
    return "Unknown";
}

namespace {

const std::unordered_set<std::string_view> kReservedWords = {
    "break",   "case",    "catch",   "class",   "const",     "continue",
    "debugger", "default", "delete",  "do",      "else",      "enum",
    "export",  "extends", "finally", "for",     "function",  "if",
    "import",  "in",      "instanceof", "new",   "return",    "super",
    "switch",  "this",    "throw",   "try",     "typeof",    "var",
    "void",    "while",   "with",    "let",     "yield",     "await",
};

// Keywords that denote values; a `/` after one of these is division.
const std::unordered_set<std::string_view> kValueKeywords = {
    "this", "super",
};

// Multi-character punctuators, longest first within each leading character.
const std::array<std::string_view, 33> kPunctuators3Plus = {
    ">>>=", "...",  "===", "!==", "**=", "<<=", ">>=", "&&=", "||=", "?\?=",
    ">>>",  "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "?\?",  "?.",
    "++",   "--",   "+=",  "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",
    "<<",   ">>",   "**",
};

const char kSinglePunct[] = "{}()[];,<>+-*/%&|^!~?:=.@";

bool is_ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(unsigned char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

struct Lexer {
    std::string_view src;
    size_t pos = 0;
    Position loc;
    TokenFile out;

    // `(` groups: records the significant token before each `(`, so the
    // regex-vs-division decision after `)` can look at the group head.
    struct ParenInfo { bool regexAfterClose; };
    std::vector<ParenInfo> parenStack;
    // Set when the previous token was `)`; carries the popped group head.
    bool lastCloseParenAllowsRegex = false;

    // Template lexing contexts. Each entry is an open template; `braceDepth`
    // counts `{` punctuators inside the current `${ }` substitution.
    std::vector<int> templateStack;

    explicit Lexer(std::string_view s) : src(s) { out.text = std::string(s); }

    bool eof() const { return pos >= src.size(); }
    char peek(size_t k = 0) const { return pos + k < src.size() ? src[pos + k] : '\0'; }

    bool starts_with(std::string_view s) const {
        return src.compare(pos, s.size(), s) == 0;
    }

    // Advances one character, maintaining line/column. Treats \r\n as a
    // single terminator and counts columns in code points.
    void advance() {
        char c = src[pos];
        if (c == '\n') {
            loc.line++;
            loc.col = 0;
            pos++;
        } else if (c == '\r') {
            loc.line++;
            loc.col = 0;
            pos++;
            if (!eof() && src[pos] == '\n') pos++;
        } else if (starts_with("\xe2\x80\xa8") || starts_with("\xe2\x80\xa9")) {
            // U+2028 / U+2029
            loc.line++;
            loc.col = 0;
            pos += 3;
        } else {
            pos++;
            // Skip UTF-8 continuation bytes without advancing the column.
            while (!eof() && (static_cast<unsigned char>(src[pos]) & 0xC0) == 0x80) pos++;
            loc.col++;
        }
    }

    void advance_n(size_t n) {
        size_t target = pos + n;
        while (pos < target && !eof()) advance();
    }

    [[noreturn]] void fail(const std::string& msg) { throw LexError(loc, pos, msg); }

    bool is_line_terminator_at(size_t p) const {
        if (p >= src.size()) return false;
        char c = src[p];
        return c == '\n' || c == '\r' ||
               src.compare(p, 3, "\xe2\x80\xa8") == 0 ||
               src.compare(p, 3, "\xe2\x80\xa9") == 0;
    }

    // Consumes whitespace and comments; returns the trivia slice and whether
    // it contained a line terminator.
    std::pair<std::string, bool> scan_trivia() {
        size_t start = pos;
        bool newline = false;
        // Hashbang only at the very start of the file.
        if (pos == 0 && starts_with("#!")) {
            while (!eof() && !is_line_terminator_at(pos)) advance();
        }
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\v' || c == '\f') {
                advance();
            } else if (is_line_terminator_at(pos)) {
                newline = true;
                advance();
            } else if (starts_with("\xc2\xa0") || starts_with("\xef\xbb\xbf")) {
                // NBSP or BOM
                advance();
            } else if (starts_with("//")) {
                while (!eof() && !is_line_terminator_at(pos)) advance();
            } else if (starts_with("/*")) {
                advance_n(2);
                bool closed = false;
                while (!eof()) {
                    if (starts_with("*/")) {
                        advance_n(2);
                        closed = true;
                        break;
                    }
                    if (is_line_terminator_at(pos)) newline = true;
                    advance();
                }
                if (!closed) fail("unterminated block comment");
            } else {
                break;
            }
        }
        return {std::string(src.substr(start, pos - start)), newline};
    }

    const Token* prev_token() const {
        return out.tokens.empty() ? nullptr : &out.tokens.back();
    }

    bool regex_allowed() const {
        const Token* p = prev_token();
        if (!p) return true;
        switch (p->kind) {
            case TokenKind::Identifier:
            case TokenKind::Numeric:
            case TokenKind::String:
            case TokenKind::Template:
            case TokenKind::Regex:
            case TokenKind::Boolean:
            case TokenKind::Null:
                return false;
            case TokenKind::Keyword:
                return kValueKeywords.count(p->text) == 0;
            case TokenKind::Punctuator:
                if (p->text == ")") return lastCloseParenAllowsRegex;
                if (p->text == "]") return false;
                // `}` ends either a block (statement position: regex) or an
                // object literal (value: division). Blocks dominate in
                // practice, so prefer regex.
                return true;
        }
        return true;
    }

    void push_token(TokenKind kind, size_t startPos, Position startLoc,
                    std::string leading, bool newline) {
        Token t;
        t.kind = kind;
        t.text = std::string(src.substr(startPos, pos - startPos));
        t.leading = std::move(leading);
        t.span = Span{startLoc, loc};
        t.offset = startPos;
        t.newlineBefore = newline;
        out.tokens.push_back(std::move(t));
    }

    void scan_string() {
        char quote = peek();
        advance();
        while (true) {
            if (eof()) fail("unterminated string literal");
            char c = peek();
            if (c == quote) {
                advance();
                return;
            }
            if (c == '\\') {
                advance();
                if (eof()) fail("unterminated string literal");
                advance();  // escaped char or line continuation
            } else if (is_line_terminator_at(pos)) {
                fail("unterminated string literal");
            } else {
                advance();
            }
        }
    }

    void scan_regex() {
        advance();  // leading /
        bool inClass = false;
        while (true) {
            if (eof() || is_line_terminator_at(pos)) fail("unterminated regular expression");
            char c = peek();
            if (c == '\\') {
                advance();
                if (eof() || is_line_terminator_at(pos)) fail("unterminated regular expression");
                advance();
            } else if (c == '[') {
                inClass = true;
                advance();
            } else if (c == ']') {
                inClass = false;
                advance();
            } else if (c == '/' && !inClass) {
                advance();
                break;
            } else {
                advance();
            }
        }
        while (!eof() && is_ident_part(static_cast<unsigned char>(peek()))) advance();
    }

    void scan_number() {
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance_n(2);
            while (is_hex_digit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
        } else if (peek() == '0' && (peek(1) == 'o' || peek(1) == 'O' ||
                                     peek(1) == 'b' || peek(1) == 'B')) {
            advance_n(2);
            while (is_digit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
        } else {
            while (is_digit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
            if (peek() == '.') {
                advance();
                while (is_digit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
            }
            if (peek() == 'e' || peek() == 'E') {
                size_t save = pos;
                Position saveLoc = loc;
                advance();
                if (peek() == '+' || peek() == '-') advance();
                if (is_digit(static_cast<unsigned char>(peek()))) {
                    while (is_digit(static_cast<unsigned char>(peek()))) advance();
                } else {
                    pos = save;
                    loc = saveLoc;
                }
            }
        }
        if (peek() == 'n') advance();  // bigint
    }

    // Scans a template chunk starting at ` or at the } that closes a
    // substitution. Stops after `${` (substitution begins) or after the
    // closing backtick. Returns true if a substitution begins.
    bool scan_template_chunk() {
        advance();  // ` or }
        while (true) {
            if (eof()) fail("unterminated template literal");
            char c = peek();
            if (c == '`') {
                advance();
                return false;
            }
            if (c == '$' && peek(1) == '{') {
                advance_n(2);
                return true;
            }
            if (c == '\\') {
                advance();
                if (eof()) fail("unterminated template literal");
                advance();
            } else {
                advance();
            }
        }
    }

    void run() {
        while (true) {
            auto [leading, newline] = scan_trivia();
            if (eof()) {
                if (!templateStack.empty()) fail("unterminated template literal");
                out.eofTrivia = std::move(leading);
                out.eofPos = loc;
                out.eofOffset = src.size() - out.eofTrivia.size();
                return;
            }
            size_t startPos = pos;
            Position startLoc = loc;
            char c = peek();
            bool closeParenRegexFlag = false;

            if (c == '`') {
                bool substitution = scan_template_chunk();
                if (substitution) templateStack.push_back(0);
                push_token(TokenKind::Template, startPos, startLoc, std::move(leading), newline);
            } else if (c == '}' && !templateStack.empty() && templateStack.back() == 0) {
                // Resume the innermost template.
                bool substitution = scan_template_chunk();
                if (!substitution) templateStack.pop_back();
                push_token(TokenKind::Template, startPos, startLoc, std::move(leading), newline);
            } else if (c == '\'' || c == '"') {
                scan_string();
                push_token(TokenKind::String, startPos, startLoc, std::move(leading), newline);
            } else if (is_digit(static_cast<unsigned char>(c)) ||
                       (c == '.' && is_digit(static_cast<unsigned char>(peek(1))))) {
                scan_number();
                push_token(TokenKind::Numeric, startPos, startLoc, std::move(leading), newline);
            } else if (is_ident_start(static_cast<unsigned char>(c)) ||
                       (c == '#' && is_ident_start(static_cast<unsigned char>(peek(1))))) {
                if (c == '#') advance();
                while (!eof() && is_ident_part(static_cast<unsigned char>(peek()))) advance();
                std::string_view word = src.substr(startPos, pos - startPos);
                TokenKind kind = TokenKind::Identifier;
                if (word == "true" || word == "false") kind = TokenKind::Boolean;
                else if (word == "null") kind = TokenKind::Null;
                else if (kReservedWords.count(word)) kind = TokenKind::Keyword;
                push_token(kind, startPos, startLoc, std::move(leading), newline);
            } else if (c == '/' && regex_allowed()) {
                scan_regex();
                push_token(TokenKind::Regex, startPos, startLoc, std::move(leading), newline);
            } else {
                // Punctuator.
                std::string_view rest = src.substr(pos);
                std::string_view matched;
                for (std::string_view p : kPunctuators3Plus) {
                    if (rest.size() >= p.size() && rest.substr(0, p.size()) == p) {
                        if (p.size() > matched.size()) matched = p;
                    }
                }
                // `?.` followed by a digit is `?` then `.5` (optional chain
                // cannot precede a numeric literal).
                if (matched == "?." && is_digit(static_cast<unsigned char>(peek(2)))) {
                    matched = std::string_view();
                }
                if (matched.empty()) {
                    if (std::strchr(kSinglePunct, c) == nullptr || c == '\0') {
                        fail(std::string("unexpected character '") + c + "'");
                    }
                    matched = rest.substr(0, 1);
                }

                if (matched == "(") {
                    const Token* p = prev_token();
                    bool headAllows =
                        p != nullptr && p->kind == TokenKind::Keyword &&
                        (p->text == "if" || p->text == "while" || p->text == "for" ||
                         p->text == "with");
                    parenStack.push_back(ParenInfo{headAllows});
                } else if (matched == ")") {
                    if (!parenStack.empty()) {
                        closeParenRegexFlag = parenStack.back().regexAfterClose;
                        parenStack.pop_back();
                    }
                } else if (matched == "{") {
                    if (!templateStack.empty()) templateStack.back()++;
                } else if (matched == "}") {
                    if (!templateStack.empty() && templateStack.back() > 0) templateStack.back()--;
                }

                advance_n(matched.size());
                push_token(TokenKind::Punctuator, startPos, startLoc, std::move(leading), newline);
            }

            lastCloseParenAllowsRegex =
                out.tokens.back().isPunct(")") ? closeParenRegexFlag : false;
        }
    }
};

}  // namespace

bool is_reserved_word(std::string_view word) {
    return kReservedWords.count(word) != 0 || word == "true" || word == "false" ||
           word == "null";
}

TokenFile lex(std::string_view source) {
    Lexer lexer(source);
    lexer.run();
    return std::move(lexer.out);
}

}  // namespace tsweave::js
