#include "tsweave/type_parser.hpp"

#include "tsweave/lexer.hpp"

namespace tsweave::ts {

namespace {

using js::Token;
using js::TokenKind;

// Identifier-like keywords that may begin a primary type.
bool keyword_type_head(std::string_view text) {
    return text == "void" || text == "null" || text == "this" || text == "new" ||
           text == "typeof" || text == "import";
}

struct TypeParser {
    const std::vector<Token>& toks;
    int pos;
    // Count of `>` still owed out of a multi-character token such as `>>`.
    int splitGt = 0;

    const Token* cur() const {
        return static_cast<size_t>(pos) < toks.size() ? &toks[static_cast<size_t>(pos)] : nullptr;
    }

    bool at_punct(std::string_view p) const {
        const Token* t = cur();
        return splitGt == 0 && t && t->isPunct(p);
    }

    bool eat_punct(std::string_view p) {
        if (!at_punct(p)) return false;
        pos++;
        return true;
    }

    bool at_word(std::string_view w) const {
        const Token* t = cur();
        return splitGt == 0 && t &&
               (t->kind == TokenKind::Identifier || t->kind == TokenKind::Keyword) &&
               t->text == w;
    }

    bool eat_word(std::string_view w) {
        if (!at_word(w)) return false;
        pos++;
        return true;
    }

    // Consumes one `>`, splitting a longer token when needed.
    bool eat_gt() {
        if (splitGt > 0) {
            splitGt--;
            if (splitGt == 0) pos++;
            return true;
        }
        const Token* t = cur();
        if (!t || t->kind != TokenKind::Punctuator) return false;
        if (t->text == ">") {
            pos++;
            return true;
        }
        if (t->text == ">>") {
            splitGt = 1;
            return true;
        }
        if (t->text == ">>>") {
            splitGt = 2;
            return true;
        }
        return false;
    }

    bool parse_entity_name() {
        const Token* t = cur();
        if (!t || splitGt != 0) return false;
        if (t->kind != TokenKind::Identifier &&
            !(t->kind == TokenKind::Keyword && (t->text == "this" || t->text == "void" ||
                                                t->text == "null"))) {
            return false;
        }
        pos++;
        while (at_punct(".")) {
            int save = pos;
            pos++;
            const Token* n = cur();
            if (!n || (n->kind != TokenKind::Identifier && n->kind != TokenKind::Keyword)) {
                pos = save;
                break;
            }
            pos++;
        }
        return true;
    }

    bool parse_type_args() {
        if (!at_punct("<")) return false;
        int save = pos;
        pos++;
        if (eat_gt()) return true;  // permissive: `<>` treated as empty args
        if (!parse_type()) {
            pos = save;
            return false;
        }
        while (eat_punct(",")) {
            if (!parse_type()) {
                pos = save;
                splitGt = 0;
                return false;
            }
        }
        if (!eat_gt()) {
            pos = save;
            splitGt = 0;
            return false;
        }
        return true;
    }

    // Binding name inside a function-type parameter: identifier, or a
    // destructuring pattern skipped as a balanced bracket run.
    bool parse_binding_name() {
        const Token* t = cur();
        if (!t || splitGt != 0) return false;
        if (t->kind == TokenKind::Identifier ||
            (t->kind == TokenKind::Keyword && t->text == "this")) {
            pos++;
            return true;
        }
        if (t->isPunct("{") || t->isPunct("[")) return skip_balanced();
        return false;
    }

    bool skip_balanced() {
        const Token* t = cur();
        if (!t) return false;
        std::string_view open = t->text;
        std::string_view close = open == "{" ? "}" : open == "[" ? "]" : ")";
        int depth = 0;
        while (cur()) {
            if (at_punct(open)) depth++;
            else if (at_punct(close)) {
                depth--;
                if (depth == 0) {
                    pos++;
                    return true;
                }
            }
            pos++;
        }
        return false;
    }

    bool parse_param() {
        eat_punct("...");
        if (!parse_binding_name()) return false;
        eat_punct("?");
        if (eat_punct(":")) {
            if (!parse_type()) return false;
        }
        return true;
    }

    bool parse_param_list_and_return() {
        if (!eat_punct("(")) return false;
        if (!eat_punct(")")) {
            if (!parse_param()) return false;
            while (eat_punct(",")) {
                if (!parse_param()) return false;
            }
            if (!eat_punct(")")) return false;
        }
        if (!eat_punct("=>")) return false;
        return parse_type();
    }

    // Type parameters of a generic function type: `<T, U extends V>(...)`.
    bool parse_type_params() {
        if (!eat_punct("<")) return false;
        do {
            const Token* t = cur();
            if (!t || t->kind != TokenKind::Identifier) return false;
            pos++;
            if (eat_word("extends")) {
                if (!parse_type()) return false;
            }
            if (eat_punct("=")) {
                if (!parse_type()) return false;
            }
        } while (eat_punct(","));
        return eat_gt();
    }

    bool try_parse_function_type() {
        int save = pos;
        eat_word("new");
        if (at_punct("<")) {
            if (!parse_type_params()) {
                pos = save;
                splitGt = 0;
                return false;
            }
        }
        if (!parse_param_list_and_return()) {
            pos = save;
            splitGt = 0;
            return false;
        }
        return true;
    }

    bool parse_property_name() {
        const Token* t = cur();
        if (!t || splitGt != 0) return false;
        if (t->kind == TokenKind::Identifier || t->kind == TokenKind::Keyword ||
            t->kind == TokenKind::String || t->kind == TokenKind::Numeric ||
            t->kind == TokenKind::Boolean || t->kind == TokenKind::Null) {
            pos++;
            return true;
        }
        return false;
    }

    // Parameter list and optional `: T` return annotation, shared by call,
    // construct, and method signatures.
    bool parse_signature_tail() {
        if (at_punct("<") && !parse_type_params()) return false;
        if (!eat_punct("(")) return false;
        if (!eat_punct(")")) {
            if (!parse_param()) return false;
            while (eat_punct(",")) {
                if (!parse_param()) return false;
            }
            if (!eat_punct(")")) return false;
        }
        if (eat_punct(":")) return parse_type();
        return true;
    }

    bool parse_object_member() {
        // Index signature or mapped-type-ish member.
        if (at_punct("[")) {
            if (!skip_balanced()) return false;
            eat_punct("?");
            if (eat_punct(":")) return parse_type();
            return true;
        }
        // Call signature.
        if (at_punct("(") || at_punct("<")) return parse_signature_tail();
        if (at_word("readonly")) {
            // `readonly` may be a modifier or itself a property name.
            int save = pos;
            pos++;
            if (at_punct(":") || at_punct("?") || at_punct("(") || at_punct(",") ||
                at_punct(";") || at_punct("}")) {
                pos = save;
            }
        }
        // Construct signature.
        if (at_word("new")) {
            int save = pos;
            pos++;
            if (at_punct("(") || at_punct("<")) return parse_signature_tail();
            pos = save;
        }
        if (!parse_property_name()) return false;
        eat_punct("?");
        if (at_punct("(") || at_punct("<")) return parse_signature_tail();
        if (eat_punct(":")) return parse_type();
        return true;
    }

    bool parse_object_type() {
        if (!eat_punct("{")) return false;
        while (!at_punct("}")) {
            if (!cur()) return false;
            if (!parse_object_member()) return false;
            if (!eat_punct(",") && !eat_punct(";")) {
                if (!at_punct("}")) return false;
            }
        }
        pos++;
        return true;
    }

    bool parse_tuple_type() {
        if (!eat_punct("[")) return false;
        if (eat_punct("]")) return true;
        do {
            eat_punct("...");
            // Labeled tuple element: `name: T`.
            {
                int save = pos;
                const Token* t = cur();
                if (t && (t->kind == TokenKind::Identifier || t->kind == TokenKind::Keyword)) {
                    pos++;
                    eat_punct("?");
                    if (!eat_punct(":")) pos = save;
                }
            }
            if (!parse_type()) return false;
        } while (eat_punct(","));
        return eat_punct("]");
    }

    bool parse_template_type() {
        const Token* t = cur();
        if (!t || t->kind != TokenKind::Template) return false;
        // head chunk; `${` -terminated chunks are followed by a type and a
        // continuation template token.
        while (true) {
            const Token* chunk = cur();
            if (!chunk || chunk->kind != TokenKind::Template) return false;
            bool continues = chunk->text.size() >= 2 &&
                             chunk->text.compare(chunk->text.size() - 2, 2, "${") == 0;
            pos++;
            if (!continues) return true;
            if (!parse_type()) return false;
        }
    }

    bool parse_primary() {
        const Token* t = cur();
        if (!t || splitGt != 0) return false;
        if (at_punct("(")) {
            int save = pos;
            pos++;
            if (parse_type() && eat_punct(")")) return true;
            pos = save;
            splitGt = 0;
            return false;
        }
        if (at_punct("{")) return parse_object_type();
        if (at_punct("[")) return parse_tuple_type();
        if (t->kind == TokenKind::Template) return parse_template_type();
        if (t->kind == TokenKind::String || t->kind == TokenKind::Numeric ||
            t->kind == TokenKind::Boolean || t->kind == TokenKind::Null) {
            pos++;
            return true;
        }
        if (at_punct("-")) {
            pos++;
            const Token* n = cur();
            if (n && n->kind == TokenKind::Numeric) {
                pos++;
                return true;
            }
            return false;
        }
        if (t->kind == TokenKind::Keyword && !keyword_type_head(t->text)) return false;
        if (t->kind == TokenKind::Keyword && t->text == "typeof") {
            pos++;
            return parse_entity_name();
        }
        if (t->kind == TokenKind::Keyword && t->text == "import") {
            pos++;
            if (!eat_punct("(")) return false;
            const Token* s = cur();
            if (!s || s->kind != TokenKind::String) return false;
            pos++;
            if (!eat_punct(")")) return false;
            while (at_punct(".")) {
                pos++;
                const Token* n = cur();
                if (!n || n->kind != TokenKind::Identifier) return false;
                pos++;
            }
            parse_type_args();
            return true;
        }
        if (!parse_entity_name()) return false;
        {
            int save = pos;
            if (at_punct("<") && !parse_type_args()) {
                pos = save;
                splitGt = 0;
            }
        }
        return true;
    }

    bool parse_operator_type() {
        if (eat_word("keyof") || eat_word("readonly") || eat_word("infer") ||
            eat_word("unique")) {
            return parse_operator_type();
        }
        if (!parse_primary()) return false;
        // Postfix: array `[]`, indexed access `[T]`, non-null-ish suffixes.
        while (splitGt == 0 && at_punct("[")) {
            pos++;
            if (eat_punct("]")) continue;
            if (!parse_type()) return false;
            if (!eat_punct("]")) return false;
        }
        return true;
    }

    bool parse_intersection() {
        eat_punct("&");
        if (!parse_operator_type()) return false;
        while (at_punct("&")) {
            int save = pos;
            pos++;
            if (!parse_operator_type()) {
                pos = save;
                break;
            }
        }
        return true;
    }

    bool parse_union() {
        eat_punct("|");
        if (!parse_intersection()) return false;
        while (at_punct("|")) {
            int save = pos;
            pos++;
            if (!parse_intersection()) {
                pos = save;
                break;
            }
        }
        return true;
    }

    bool parse_type() {
        if (at_punct("(") || at_word("new") || at_punct("<")) {
            if (try_parse_function_type()) return true;
        }
        if (!parse_union()) return false;
        // Conditional type.
        if (at_word("extends")) {
            int save = pos;
            pos++;
            if (parse_type() && eat_punct("?") && parse_type() && eat_punct(":") &&
                parse_type()) {
                return true;
            }
            pos = save;
            splitGt = 0;
        }
        return true;
    }
};

}  // namespace

int parse_type_tokens(const std::vector<js::Token>& tokens, int start) {
    if (start < 0 || static_cast<size_t>(start) >= tokens.size()) return -1;
    TypeParser p{tokens, start};
    if (!p.parse_type()) return -1;
    if (p.splitGt != 0) return -1;
    return p.pos;
}

namespace {

bool plain_spacing(std::string_view trivia) {
    for (char c : trivia)
        if (c != ' ' && c != '\t') return false;
    return true;
}

}  // namespace

bool parses_as_type(std::string_view text) {
    js::TokenFile lexed;
    try {
        lexed = js::lex(text);
    } catch (const js::LexError&) {
        return false;
    }
    if (lexed.tokens.empty()) return false;
    // A comment would swallow the rest of the insertion line and a line
    // terminator can defeat arrow return positions, so only spaces and tabs
    // may appear between tokens.
    if (!plain_spacing(lexed.eofTrivia)) return false;
    for (const js::Token& t : lexed.tokens)
        if (!plain_spacing(t.leading)) return false;
    int end = parse_type_tokens(lexed.tokens, 0);
    return end == static_cast<int>(lexed.tokens.size());
}

}  // namespace tsweave::ts
