#include "tsweave/parser.hpp"

#include <utility>

#include "tsweave/lexer.hpp"
#include "tsweave/type_parser.hpp"

namespace tsweave::js {

namespace {

// Binding powers for binary operators; higher binds tighter.
int binary_precedence(const Token& t, bool noIn) {
    if (t.kind == TokenKind::Keyword) {
        if (t.text == "instanceof") return 8;
        if (t.text == "in") return noIn ? 0 : 8;
        return 0;
    }
    if (t.kind != TokenKind::Punctuator) return 0;
    const std::string& p = t.text;
    if (p == "??") return 1;
    if (p == "||") return 2;
    if (p == "&&") return 3;
    if (p == "|") return 4;
    if (p == "^") return 5;
    if (p == "&") return 6;
    if (p == "==" || p == "!=" || p == "===" || p == "!==") return 7;
    if (p == "<" || p == ">" || p == "<=" || p == ">=") return 8;
    if (p == "<<" || p == ">>" || p == ">>>") return 9;
    if (p == "+" || p == "-") return 10;
    if (p == "*" || p == "/" || p == "%") return 11;
    if (p == "**") return 12;
    return 0;
}

bool is_assign_op(const Token& t) {
    if (t.kind != TokenKind::Punctuator) return false;
    const std::string& p = t.text;
    return p == "=" || p == "+=" || p == "-=" || p == "*=" || p == "/=" ||
           p == "%=" || p == "**=" || p == "<<=" || p == ">>=" || p == ">>>=" ||
           p == "&=" || p == "|=" || p == "^=" || p == "&&=" || p == "||=" ||
           p == "?\?=";
}

struct Parser {
    Ast ast;
    int pos = 0;

    explicit Parser(TokenFile tf) { ast.file = std::move(tf); }

    int count() const { return static_cast<int>(ast.file.tokens.size()); }
    bool eof() const { return pos >= count(); }

    const Token& tok(int i) const { return ast.file.tokens[static_cast<size_t>(i)]; }
    const Token* cur() const { return eof() ? nullptr : &tok(pos); }
    const Token* peek(int k = 1) const {
        return pos + k < count() ? &tok(pos + k) : nullptr;
    }

    Position here() const {
        return eof() ? ast.file.eofPos : tok(pos).span.start;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(here(), msg); }

    bool at_punct(std::string_view p) const {
        const Token* t = cur();
        return t && t->isPunct(p);
    }
    bool at_keyword(std::string_view k) const {
        const Token* t = cur();
        return t && t->isKeyword(k);
    }
    bool at_ident(std::string_view name) const {
        const Token* t = cur();
        return t && t->isIdent(name);
    }

    bool eat_punct(std::string_view p) {
        if (!at_punct(p)) return false;
        pos++;
        return true;
    }
    bool eat_keyword(std::string_view k) {
        if (!at_keyword(k)) return false;
        pos++;
        return true;
    }

    void expect_punct(std::string_view p) {
        if (!eat_punct(p)) fail(std::string("expected '") + std::string(p) + "'");
    }

    NodeId make(NodeKind kind, int first) {
        Node n;
        n.kind = kind;
        n.first = first;
        n.end = first;
        ast.nodes.push_back(std::move(n));
        return static_cast<NodeId>(ast.nodes.size() - 1);
    }

    Node& node(NodeId id) { return ast[id]; }

    void finish(NodeId id) { node(id).end = pos; }

    // ---- annotations ----

    // Consumes `: Type` when present, recording it on the node.
    void maybe_annotation(NodeId id) {
        if (!at_punct(":")) return;
        int colon = pos;
        int end = ts::parse_type_tokens(ast.file.tokens, pos + 1);
        if (end < 0) fail("expected type after ':'");
        node(id).typeColon = colon;
        node(id).typeEnd = end;
        pos = end;
    }

    // ---- statement termination ----

    void consume_semicolon() {
        if (eat_punct(";")) return;
        const Token* t = cur();
        if (!t || t->isPunct("}") || t->newlineBefore) return;
        fail("expected ';'");
    }

    bool newline_before_cur() const {
        const Token* t = cur();
        return !t || t->newlineBefore;
    }

    // ---- program ----

    NodeId parse_program_node() {
        NodeId prog = make(NodeKind::Program, 0);
        std::vector<NodeId> stmts;
        while (!eof()) stmts.push_back(parse_statement());
        node(prog).kids = std::move(stmts);
        finish(prog);
        return prog;
    }

    // ---- statements ----

    NodeId parse_statement() {
        const Token* t = cur();
        if (!t) fail("unexpected end of input");
        if (t->kind == TokenKind::Punctuator) {
            if (t->text == "{") return parse_block();
            if (t->text == ";") {
                NodeId n = make(NodeKind::EmptyStatement, pos);
                pos++;
                finish(n);
                return n;
            }
            if (t->text == "@") return parse_decorated_class();
        }
        if (t->kind == TokenKind::Keyword) {
            const std::string& k = t->text;
            if (k == "var" || k == "let" || k == "const") return parse_var_statement(true);
            if (k == "function") return parse_function(NodeKind::FunctionDecl);
            if (k == "class") return parse_class(NodeKind::ClassDecl);
            if (k == "if") return parse_if();
            if (k == "for") return parse_for();
            if (k == "while") return parse_while();
            if (k == "do") return parse_do_while();
            if (k == "switch") return parse_switch();
            if (k == "return") return parse_return();
            if (k == "throw") return parse_throw();
            if (k == "try") return parse_try();
            if (k == "break" || k == "continue") return parse_break_continue();
            if (k == "import") {
                // `import(` and `import.meta` are expressions.
                const Token* n = peek();
                if (n && (n->isPunct("(") || n->isPunct("."))) return parse_expression_statement();
                return parse_import();
            }
            if (k == "export") return parse_export();
            if (k == "debugger") {
                NodeId n = make(NodeKind::DebuggerStatement, pos);
                pos++;
                consume_semicolon();
                finish(n);
                return n;
            }
        }
        if (t->kind == TokenKind::Identifier) {
            if (t->text == "async") {
                const Token* n = peek();
                if (n && n->isKeyword("function") && !n->newlineBefore) {
                    return parse_function(NodeKind::FunctionDecl);
                }
            }
            if (t->text == "declare") {
                const Token* n = peek();
                if (n && (n->isKeyword("var") || n->isKeyword("let") ||
                          n->isKeyword("const") || n->isKeyword("function") ||
                          n->isKeyword("class"))) {
                    int first = pos;
                    pos++;
                    NodeId inner = parse_statement();
                    node(inner).first = first;
                    node(inner).flags |= kFlagDeclare;
                    return inner;
                }
            }
            // Label: `name: statement`.
            const Token* n = peek();
            if (n && n->isPunct(":")) {
                NodeId lab = make(NodeKind::LabeledStatement, pos);
                node(lab).nameToken = pos;
                pos += 2;
                node(lab).kids.push_back(parse_statement());
                finish(lab);
                return lab;
            }
        }
        return parse_expression_statement();
    }

    NodeId parse_decorated_class() {
        int first = pos;
        while (at_punct("@")) {
            pos++;
            parse_lhs_expression();
        }
        if (!at_keyword("class")) fail("expected class after decorator");
        NodeId cls = parse_class(NodeKind::ClassDecl);
        node(cls).first = first;
        return cls;
    }

    NodeId parse_block() {
        NodeId blk = make(NodeKind::Block, pos);
        expect_punct("{");
        std::vector<NodeId> stmts;
        while (!at_punct("}")) {
            if (eof()) fail("unterminated block");
            stmts.push_back(parse_statement());
        }
        pos++;
        node(blk).kids = std::move(stmts);
        finish(blk);
        return blk;
    }

    // `consumeSemi` is false inside for-statement headers.
    NodeId parse_var_statement(bool consumeSemi, bool noIn = false) {
        NodeId stmt = make(NodeKind::VarStatement, pos);
        pos++;  // var/let/const
        std::vector<NodeId> decls;
        do {
            decls.push_back(parse_declarator(noIn));
        } while (eat_punct(","));
        node(stmt).kids = std::move(decls);
        if (consumeSemi) consume_semicolon();
        finish(stmt);
        return stmt;
    }

    NodeId parse_declarator(bool noIn) {
        NodeId decl = make(NodeKind::Declarator, pos);
        NodeId target = parse_binding_target();
        node(decl).kids.push_back(target);
        if (node(target).kind == NodeKind::Identifier) {
            node(decl).nameToken = node(target).first;
        }
        maybe_annotation(decl);
        if (eat_punct("=")) {
            node(decl).kids.push_back(parse_assignment_expression(noIn));
        }
        finish(decl);
        return decl;
    }

    NodeId parse_binding_target() {
        const Token* t = cur();
        if (!t) fail("expected binding target");
        if (t->isPunct("{")) return parse_object_pattern();
        if (t->isPunct("[")) return parse_array_pattern();
        if (t->kind == TokenKind::Identifier ||
            (t->kind == TokenKind::Keyword && (t->text == "let" || t->text == "yield" ||
                                               t->text == "await"))) {
            NodeId id = make(NodeKind::Identifier, pos);
            node(id).nameToken = pos;
            pos++;
            finish(id);
            return id;
        }
        fail("expected binding target");
    }

    NodeId parse_object_pattern() {
        NodeId pat = make(NodeKind::ObjectPattern, pos);
        expect_punct("{");
        std::vector<NodeId> props;
        while (!at_punct("}")) {
            if (eof()) fail("unterminated object pattern");
            if (at_punct("...")) {
                NodeId rest = make(NodeKind::RestElement, pos);
                pos++;
                node(rest).kids.push_back(parse_binding_target());
                finish(rest);
                props.push_back(rest);
            } else {
                NodeId prop = make(NodeKind::Property, pos);
                bool computed = at_punct("[");
                if (computed) {
                    node(prop).flags |= kFlagComputed;
                    pos++;
                    node(prop).kids.push_back(parse_assignment_expression(false));
                    expect_punct("]");
                } else {
                    const Token* key = cur();
                    if (!key || (key->kind != TokenKind::Identifier &&
                                 key->kind != TokenKind::Keyword &&
                                 key->kind != TokenKind::String &&
                                 key->kind != TokenKind::Numeric &&
                                 key->kind != TokenKind::Boolean &&
                                 key->kind != TokenKind::Null)) {
                        fail("expected property name in pattern");
                    }
                    node(prop).nameToken = pos;
                    pos++;
                }
                NodeId value;
                if (eat_punct(":")) {
                    value = parse_binding_element();
                } else {
                    node(prop).flags |= kFlagShorthand;
                    NodeId id = make(NodeKind::Identifier, node(prop).nameToken);
                    node(id).nameToken = node(prop).nameToken;
                    node(id).end = node(prop).nameToken + 1;
                    value = id;
                    if (at_punct("=")) {
                        NodeId ap = make(NodeKind::AssignmentPattern, node(prop).nameToken);
                        pos++;
                        node(ap).kids.push_back(id);
                        node(ap).kids.push_back(parse_assignment_expression(false));
                        finish(ap);
                        value = ap;
                    }
                }
                node(prop).kids.push_back(value);
                finish(prop);
                props.push_back(prop);
            }
            if (!eat_punct(",")) break;
        }
        expect_punct("}");
        node(pat).kids = std::move(props);
        finish(pat);
        return pat;
    }

    NodeId parse_array_pattern() {
        NodeId pat = make(NodeKind::ArrayPattern, pos);
        expect_punct("[");
        std::vector<NodeId> elems;
        while (!at_punct("]")) {
            if (eof()) fail("unterminated array pattern");
            if (at_punct(",")) {
                NodeId hole = make(NodeKind::Hole, pos);
                finish(hole);
                elems.push_back(hole);
                pos++;
                continue;
            }
            if (at_punct("...")) {
                NodeId rest = make(NodeKind::RestElement, pos);
                pos++;
                node(rest).kids.push_back(parse_binding_target());
                finish(rest);
                elems.push_back(rest);
            } else {
                elems.push_back(parse_binding_element());
            }
            if (!at_punct("]")) expect_punct(",");
        }
        pos++;
        node(pat).kids = std::move(elems);
        finish(pat);
        return pat;
    }

    // A binding target with an optional default: used in patterns.
    NodeId parse_binding_element() {
        NodeId target = parse_binding_target();
        if (at_punct("=")) {
            NodeId ap = make(NodeKind::AssignmentPattern, node(target).first);
            pos++;
            node(ap).kids.push_back(target);
            node(ap).kids.push_back(parse_assignment_expression(false));
            finish(ap);
            return ap;
        }
        return target;
    }

    NodeId parse_if() {
        NodeId n = make(NodeKind::IfStatement, pos);
        pos++;
        expect_punct("(");
        NodeId cond = parse_expression(false);
        expect_punct(")");
        NodeId then = parse_statement();
        NodeId alt;
        if (eat_keyword("else")) {
            alt = parse_statement();
        } else {
            alt = make(NodeKind::Hole, pos);
        }
        node(n).kids = {cond, then, alt};
        finish(n);
        return n;
    }

    NodeId parse_for() {
        int first = pos;
        pos++;  // for
        expect_punct("(");
        NodeId init = kNoNode;
        if (at_punct(";")) {
            init = make(NodeKind::Hole, pos);
        } else if (at_keyword("var") || at_keyword("let") || at_keyword("const")) {
            init = parse_var_statement(false, true);
        } else {
            int exprFirst = pos;
            NodeId expr = parse_expression(true);
            init = expr;
            (void)exprFirst;
        }
        if (at_keyword("in") || at_ident("of")) {
            bool isIn = at_keyword("in");
            pos++;
            NodeId n = make(isIn ? NodeKind::ForInStatement : NodeKind::ForOfStatement, first);
            NodeId right = isIn ? parse_expression(false) : parse_assignment_expression(false);
            expect_punct(")");
            NodeId body = parse_statement();
            node(n).kids = {init, right, body};
            finish(n);
            return n;
        }
        NodeId n = make(NodeKind::ForStatement, first);
        expect_punct(";");
        NodeId test = at_punct(";") ? make(NodeKind::Hole, pos) : parse_expression(false);
        expect_punct(";");
        NodeId update = at_punct(")") ? make(NodeKind::Hole, pos) : parse_expression(false);
        expect_punct(")");
        NodeId body = parse_statement();
        node(n).kids = {init, test, update, body};
        finish(n);
        return n;
    }

    NodeId parse_while() {
        NodeId n = make(NodeKind::WhileStatement, pos);
        pos++;
        expect_punct("(");
        NodeId cond = parse_expression(false);
        expect_punct(")");
        NodeId body = parse_statement();
        node(n).kids = {cond, body};
        finish(n);
        return n;
    }

    NodeId parse_do_while() {
        NodeId n = make(NodeKind::DoWhileStatement, pos);
        pos++;
        NodeId body = parse_statement();
        if (!eat_keyword("while")) fail("expected 'while'");
        expect_punct("(");
        NodeId cond = parse_expression(false);
        expect_punct(")");
        eat_punct(";");
        node(n).kids = {body, cond};
        finish(n);
        return n;
    }

    NodeId parse_switch() {
        NodeId n = make(NodeKind::SwitchStatement, pos);
        pos++;
        expect_punct("(");
        NodeId disc = parse_expression(false);
        expect_punct(")");
        expect_punct("{");
        std::vector<NodeId> kids{disc};
        while (!at_punct("}")) {
            if (eof()) fail("unterminated switch");
            NodeId c = make(NodeKind::SwitchCase, pos);
            NodeId test;
            if (eat_keyword("case")) {
                test = parse_expression(false);
            } else if (eat_keyword("default")) {
                test = make(NodeKind::Hole, pos);
            } else {
                fail("expected 'case' or 'default'");
            }
            expect_punct(":");
            std::vector<NodeId> caseKids{test};
            while (!at_punct("}") && !at_keyword("case") && !at_keyword("default")) {
                caseKids.push_back(parse_statement());
            }
            node(c).kids = std::move(caseKids);
            finish(c);
            kids.push_back(c);
        }
        pos++;
        node(n).kids = std::move(kids);
        finish(n);
        return n;
    }

    NodeId parse_return() {
        NodeId n = make(NodeKind::ReturnStatement, pos);
        pos++;
        if (!at_punct(";") && !at_punct("}") && !newline_before_cur()) {
            node(n).kids.push_back(parse_expression(false));
        }
        consume_semicolon();
        finish(n);
        return n;
    }

    NodeId parse_throw() {
        NodeId n = make(NodeKind::ThrowStatement, pos);
        pos++;
        if (newline_before_cur()) fail("newline after throw");
        node(n).kids.push_back(parse_expression(false));
        consume_semicolon();
        finish(n);
        return n;
    }

    NodeId parse_try() {
        NodeId n = make(NodeKind::TryStatement, pos);
        pos++;
        NodeId block = parse_block();
        NodeId handler = make(NodeKind::Hole, pos);
        NodeId finalizer = kNoNode;
        if (at_keyword("catch")) {
            handler = make(NodeKind::CatchClause, pos);
            pos++;
            NodeId param;
            if (eat_punct("(")) {
                param = parse_binding_target();
                expect_punct(")");
            } else {
                param = make(NodeKind::Hole, pos);
            }
            NodeId body = parse_block();
            node(handler).kids = {param, body};
            finish(handler);
        }
        if (eat_keyword("finally")) {
            finalizer = parse_block();
        } else {
            finalizer = make(NodeKind::Hole, pos);
        }
        node(n).kids = {block, handler, finalizer};
        finish(n);
        return n;
    }

    NodeId parse_break_continue() {
        bool isBreak = at_keyword("break");
        NodeId n = make(isBreak ? NodeKind::BreakStatement : NodeKind::ContinueStatement, pos);
        pos++;
        const Token* t = cur();
        if (t && t->kind == TokenKind::Identifier && !t->newlineBefore) {
            node(n).nameToken = pos;
            pos++;
        }
        consume_semicolon();
        finish(n);
        return n;
    }

    NodeId parse_expression_statement() {
        NodeId n = make(NodeKind::ExpressionStatement, pos);
        node(n).kids.push_back(parse_expression(false));
        consume_semicolon();
        finish(n);
        return n;
    }

    // ---- modules ----

    int expect_string_token() {
        const Token* t = cur();
        if (!t || t->kind != TokenKind::String) fail("expected module specifier string");
        int idx = pos;
        pos++;
        return idx;
    }

    NodeId parse_import() {
        NodeId n = make(NodeKind::ImportDecl, pos);
        pos++;  // import
        const Token* t = cur();
        if (t && t->kind == TokenKind::String) {
            node(n).nameToken = pos;
            pos++;
            consume_semicolon();
            finish(n);
            return n;
        }
        std::vector<NodeId> specs;
        bool needFrom = false;
        if (t && t->kind == TokenKind::Identifier) {
            NodeId d = make(NodeKind::ImportDefaultSpecifier, pos);
            node(d).nameToken = pos;
            pos++;
            finish(d);
            specs.push_back(d);
            needFrom = true;
            if (eat_punct(",")) t = cur();
            else t = nullptr;
        }
        if (t && t->isPunct("*")) {
            NodeId s = make(NodeKind::ImportNamespaceSpecifier, pos);
            pos++;
            if (!at_ident("as")) fail("expected 'as'");
            pos++;
            node(s).nameToken = pos;
            pos++;
            finish(s);
            specs.push_back(s);
            needFrom = true;
        } else if (t && t->isPunct("{")) {
            pos++;
            while (!at_punct("}")) {
                if (eof()) fail("unterminated import clause");
                NodeId s = make(NodeKind::ImportSpecifier, pos);
                node(s).auxToken = pos;
                pos++;
                if (at_ident("as")) {
                    pos++;
                    node(s).nameToken = pos;
                    pos++;
                } else {
                    node(s).nameToken = node(s).auxToken;
                }
                finish(s);
                specs.push_back(s);
                if (!eat_punct(",")) break;
            }
            expect_punct("}");
            needFrom = true;
        }
        if (needFrom) {
            if (!at_ident("from")) fail("expected 'from'");
            pos++;
        }
        node(n).nameToken = expect_string_token();
        node(n).kids = std::move(specs);
        consume_semicolon();
        finish(n);
        return n;
    }

    NodeId parse_export() {
        int first = pos;
        pos++;  // export
        if (at_punct("*")) {
            NodeId n = make(NodeKind::ExportAllDecl, first);
            pos++;
            if (at_ident("as")) {
                pos++;
                node(n).auxToken = pos;
                pos++;
            }
            if (!at_ident("from")) fail("expected 'from'");
            pos++;
            node(n).nameToken = expect_string_token();
            consume_semicolon();
            finish(n);
            return n;
        }
        if (at_keyword("default")) {
            NodeId n = make(NodeKind::ExportDefaultDecl, first);
            pos++;
            const Token* t = cur();
            if (t && (t->isKeyword("function") || t->isKeyword("class") ||
                      (t->isIdent("async") && peek() && peek()->isKeyword("function")))) {
                NodeId decl = t->isKeyword("class")
                                  ? parse_class(NodeKind::ClassDecl, true)
                                  : parse_function(NodeKind::FunctionDecl, true);
                node(n).kids.push_back(decl);
            } else {
                node(n).kids.push_back(parse_assignment_expression(false));
                consume_semicolon();
            }
            finish(n);
            return n;
        }
        if (at_punct("{")) {
            NodeId n = make(NodeKind::ExportNamedDecl, first);
            pos++;
            std::vector<NodeId> specs;
            while (!at_punct("}")) {
                if (eof()) fail("unterminated export clause");
                NodeId s = make(NodeKind::ExportSpecifier, pos);
                node(s).nameToken = pos;
                pos++;
                if (at_ident("as")) {
                    pos++;
                    node(s).auxToken = pos;
                    pos++;
                } else {
                    node(s).auxToken = node(s).nameToken;
                }
                finish(s);
                specs.push_back(s);
                if (!eat_punct(",")) break;
            }
            expect_punct("}");
            if (at_ident("from")) {
                pos++;
                node(n).nameToken = expect_string_token();
            }
            node(n).kids = std::move(specs);
            consume_semicolon();
            finish(n);
            return n;
        }
        // export <declaration>
        NodeId n = make(NodeKind::ExportNamedDecl, first);
        node(n).kids.push_back(parse_statement());
        finish(n);
        return n;
    }

    // ---- functions and classes ----

    NodeId parse_function(NodeKind kind, bool allowAnonymous = false) {
        NodeId fn = make(kind, pos);
        if (at_ident("async")) {
            node(fn).flags |= kFlagAsync;
            pos++;
        }
        if (!eat_keyword("function")) fail("expected 'function'");
        if (eat_punct("*")) node(fn).flags |= kFlagGenerator;
        const Token* t = cur();
        if (t && (t->kind == TokenKind::Identifier ||
                  (t->kind == TokenKind::Keyword && (t->text == "yield" || t->text == "await")))) {
            node(fn).nameToken = pos;
            pos++;
        } else if (kind == NodeKind::FunctionDecl && !allowAnonymous) {
            fail("expected function name");
        }
        std::vector<NodeId> params = parse_params();
        maybe_annotation(fn);
        node(fn).kids = std::move(params);
        if (at_punct("{")) {
            node(fn).kids.push_back(parse_block());
        } else if (kind == NodeKind::FunctionDecl) {
            // Bodyless signature, as found in declaration files.
            consume_semicolon();
        } else {
            fail("expected function body");
        }
        finish(fn);
        return fn;
    }

    std::vector<NodeId> parse_params() {
        expect_punct("(");
        std::vector<NodeId> params;
        while (!at_punct(")")) {
            if (eof()) fail("unterminated parameter list");
            NodeId p = make(NodeKind::Param, pos);
            NodeId pattern;
            if (at_punct("...")) {
                pattern = make(NodeKind::RestElement, pos);
                pos++;
                node(pattern).kids.push_back(parse_binding_target());
                finish(pattern);
            } else {
                pattern = parse_binding_target();
            }
            if (node(pattern).kind == NodeKind::Identifier) {
                node(p).nameToken = node(pattern).first;
            }
            if (eat_punct("?")) node(p).flags |= kFlagOptional;
            maybe_annotation(p);
            node(p).kids.push_back(pattern);
            if (at_punct("=")) {
                NodeId ap = make(NodeKind::AssignmentPattern, node(pattern).first);
                pos++;
                node(ap).kids.push_back(pattern);
                node(ap).kids.push_back(parse_assignment_expression(false));
                finish(ap);
                node(p).kids[0] = ap;
                node(p).flags |= kFlagOptional;
            }
            finish(p);
            params.push_back(p);
            if (!eat_punct(",")) break;
        }
        expect_punct(")");
        return params;
    }

    NodeId parse_class(NodeKind kind, bool allowAnonymous = false) {
        NodeId cls = make(kind, pos);
        pos++;  // class
        const Token* t = cur();
        if (t && t->kind == TokenKind::Identifier) {
            node(cls).nameToken = pos;
            pos++;
        } else if (kind == NodeKind::ClassDecl && !allowAnonymous) {
            fail("expected class name");
        }
        NodeId superclass;
        if (eat_keyword("extends")) {
            superclass = parse_lhs_expression();
        } else {
            superclass = make(NodeKind::Hole, pos);
        }
        expect_punct("{");
        std::vector<NodeId> kids{superclass};
        while (!at_punct("}")) {
            if (eof()) fail("unterminated class body");
            if (eat_punct(";")) continue;
            kids.push_back(parse_class_member());
        }
        pos++;
        node(cls).kids = std::move(kids);
        finish(cls);
        return cls;
    }

    NodeId parse_class_member() {
        int first = pos;
        uint32_t flags = 0;
        if (at_ident("static")) {
            const Token* n = peek();
            if (n && !n->isPunct("(") && !n->isPunct("=")) {
                flags |= kFlagStatic;
                pos++;
            }
        }
        if (at_ident("async")) {
            const Token* n = peek();
            if (n && !n->isPunct("(") && !n->isPunct("=") && !n->newlineBefore) {
                flags |= kFlagAsync;
                pos++;
            }
        }
        if (at_punct("*")) {
            flags |= kFlagGenerator;
            pos++;
        }
        if (at_ident("get") || at_ident("set")) {
            const Token* n = peek();
            if (n && !n->isPunct("(") && !n->isPunct("=") && !n->isPunct(";")) {
                flags |= at_ident("get") ? kFlagGetter : kFlagSetter;
                pos++;
            }
        }
        // Key.
        int nameToken = -1;
        NodeId computedKey = kNoNode;
        if (at_punct("[")) {
            flags |= kFlagComputed;
            pos++;
            computedKey = parse_assignment_expression(false);
            expect_punct("]");
        } else {
            const Token* t = cur();
            if (!t) fail("expected class member name");
            nameToken = pos;
            pos++;
        }
        if (at_punct("(")) {
            NodeId m = make(NodeKind::MethodDef, first);
            node(m).flags = flags;
            node(m).nameToken = nameToken;
            std::vector<NodeId> kids;
            if (computedKey != kNoNode) kids.push_back(computedKey);
            std::vector<NodeId> params = parse_params();
            kids.insert(kids.end(), params.begin(), params.end());
            maybe_annotation(m);
            kids.push_back(parse_block());
            node(m).kids = std::move(kids);
            finish(m);
            return m;
        }
        // Field.
        NodeId f = make(NodeKind::PropertyDef, first);
        node(f).flags = flags;
        node(f).nameToken = nameToken;
        if (computedKey != kNoNode) node(f).kids.push_back(computedKey);
        maybe_annotation(f);
        if (eat_punct("=")) {
            node(f).kids.push_back(parse_assignment_expression(false));
        }
        consume_semicolon();
        finish(f);
        return f;
    }

    // ---- expressions ----

    NodeId parse_expression(bool noIn) {
        NodeId first = parse_assignment_expression(noIn);
        if (!at_punct(",")) return first;
        NodeId seq = make(NodeKind::SequenceExpr, node(first).first);
        node(seq).kids.push_back(first);
        while (eat_punct(",")) {
            node(seq).kids.push_back(parse_assignment_expression(noIn));
        }
        finish(seq);
        return seq;
    }

    NodeId parse_assignment_expression(bool noIn) {
        // Arrow functions: lookahead for the three unambiguous shapes plus
        // the parenthesized form, which needs backtracking.
        if (NodeId arrow = try_parse_arrow(); arrow != kNoNode) return arrow;

        if (at_keyword("yield")) {
            NodeId y = make(NodeKind::YieldExpr, pos);
            pos++;
            if (eat_punct("*")) node(y).flags |= kFlagDelegate;
            const Token* t = cur();
            if (t && !t->newlineBefore && !t->isPunct(")") && !t->isPunct("]") &&
                !t->isPunct("}") && !t->isPunct(",") && !t->isPunct(";") &&
                !t->isPunct(":")) {
                node(y).kids.push_back(parse_assignment_expression(noIn));
            }
            finish(y);
            return y;
        }

        NodeId left = parse_conditional(noIn);
        const Token* t = cur();
        if (t && is_assign_op(*t)) {
            NodeId a = make(NodeKind::AssignExpr, node(left).first);
            node(a).auxToken = pos;
            pos++;
            NodeId right = parse_assignment_expression(noIn);
            node(a).kids = {left, right};
            finish(a);
            return a;
        }
        return left;
    }

    // Returns kNoNode when the tokens at `pos` do not begin an arrow function.
    NodeId try_parse_arrow() {
        const Token* t = cur();
        if (!t) return kNoNode;
        int save = pos;
        int nodeWatermark = static_cast<int>(ast.nodes.size());
        bool isAsync = false;

        if (t->isIdent("async")) {
            const Token* n = peek();
            if (n && !n->newlineBefore &&
                (n->kind == TokenKind::Identifier || n->isPunct("("))) {
                isAsync = true;
            }
        }
        int head = isAsync ? pos + 1 : pos;
        if (head >= count()) return kNoNode;
        const Token& ht = tok(head);

        if (ht.kind == TokenKind::Identifier && !ht.isIdent("async")) {
            // `x => ...`
            const Token* after = head + 1 < count() ? &tok(head + 1) : nullptr;
            if (!after || !after->isPunct("=>") || after->newlineBefore) {
                if (!isAsync) return kNoNode;
                return kNoNode;
            }
            NodeId arrow = make(NodeKind::ArrowFunction, pos);
            if (isAsync) {
                node(arrow).flags |= kFlagAsync;
                pos++;
            }
            NodeId p = make(NodeKind::Param, pos);
            NodeId id = make(NodeKind::Identifier, pos);
            node(id).nameToken = pos;
            pos++;
            finish(id);
            node(p).nameToken = node(id).first;
            node(p).kids.push_back(id);
            finish(p);
            node(arrow).auxToken = pos;
            pos++;  // =>
            NodeId body = at_punct("{") ? parse_block() : parse_assignment_expression(false);
            node(arrow).kids = {p, body};
            finish(arrow);
            return arrow;
        }

        if (!ht.isPunct("(")) return kNoNode;
        // Attempt `(params) [: T] => body`; backtrack on any failure.
        try {
            NodeId arrow = make(NodeKind::ArrowFunction, pos);
            if (isAsync) {
                node(arrow).flags |= kFlagAsync;
                pos++;
            }
            std::vector<NodeId> params = parse_params();
            maybe_annotation(arrow);
            if (!at_punct("=>") || cur()->newlineBefore) throw ParseError(here(), "not an arrow");
            node(arrow).auxToken = pos;
            pos++;
            NodeId body = at_punct("{") ? parse_block() : parse_assignment_expression(false);
            node(arrow).kids = std::move(params);
            node(arrow).kids.push_back(body);
            finish(arrow);
            return arrow;
        } catch (const ParseError&) {
            pos = save;
            ast.nodes.resize(static_cast<size_t>(nodeWatermark));
            return kNoNode;
        }
    }

    NodeId parse_conditional(bool noIn) {
        NodeId test = parse_binary(0, noIn);
        if (!at_punct("?") || at_punct("?.")) return test;
        NodeId n = make(NodeKind::ConditionalExpr, node(test).first);
        pos++;
        NodeId cons = parse_assignment_expression(false);
        expect_punct(":");
        NodeId alt = parse_assignment_expression(noIn);
        node(n).kids = {test, cons, alt};
        finish(n);
        return n;
    }

    NodeId parse_binary(int minPrec, bool noIn) {
        NodeId left = parse_unary();
        while (true) {
            const Token* t = cur();
            if (!t) break;
            int prec = binary_precedence(*t, noIn);
            if (prec == 0 || prec < minPrec) break;
            int opToken = pos;
            pos++;
            // `**` is right-associative; everything else left.
            int nextMin = t->isPunct("**") ? prec : prec + 1;
            NodeId right = parse_binary(nextMin, noIn);
            NodeId b = make(NodeKind::BinaryExpr, node(left).first);
            node(b).auxToken = opToken;
            node(b).kids = {left, right};
            finish(b);
            left = b;
        }
        return left;
    }

    NodeId parse_unary() {
        const Token* t = cur();
        if (!t) fail("expected expression");
        if (t->isPunct("!") || t->isPunct("~") || t->isPunct("+") || t->isPunct("-") ||
            t->isKeyword("typeof") || t->isKeyword("void") || t->isKeyword("delete")) {
            NodeId n = make(NodeKind::UnaryExpr, pos);
            pos++;
            node(n).kids.push_back(parse_unary());
            finish(n);
            return n;
        }
        if (t->isKeyword("await")) {
            NodeId n = make(NodeKind::AwaitExpr, pos);
            pos++;
            node(n).kids.push_back(parse_unary());
            finish(n);
            return n;
        }
        if (t->isPunct("++") || t->isPunct("--")) {
            NodeId n = make(NodeKind::UpdateExpr, pos);
            node(n).flags |= kFlagPrefix;
            pos++;
            node(n).kids.push_back(parse_unary());
            finish(n);
            return n;
        }
        NodeId expr = parse_postfix();
        return expr;
    }

    NodeId parse_postfix() {
        NodeId expr = parse_lhs_expression();
        const Token* t = cur();
        if (t && (t->isPunct("++") || t->isPunct("--")) && !t->newlineBefore) {
            NodeId n = make(NodeKind::UpdateExpr, node(expr).first);
            node(n).kids.push_back(expr);
            pos++;
            finish(n);
            return n;
        }
        return expr;
    }

    NodeId parse_lhs_expression() {
        NodeId expr;
        if (at_keyword("new")) {
            expr = parse_new();
        } else {
            expr = parse_primary();
        }
        return parse_call_tail(expr);
    }

    NodeId parse_new() {
        int first = pos;
        pos++;  // new
        if (at_punct(".")) {
            // new.target
            NodeId m = make(NodeKind::MemberExpr, first);
            pos++;
            node(m).auxToken = pos;
            pos++;
            finish(m);
            return m;
        }
        NodeId callee = at_keyword("new") ? parse_new() : parse_primary();
        // Member accesses bind tighter than the argument list.
        while (true) {
            if (at_punct(".")) {
                NodeId m = make(NodeKind::MemberExpr, node(callee).first);
                pos++;
                const Token* p = cur();
                if (!p || (p->kind != TokenKind::Identifier && p->kind != TokenKind::Keyword)) {
                    fail("expected property name");
                }
                node(m).auxToken = pos;
                pos++;
                node(m).kids = {callee};
                finish(m);
                callee = m;
            } else if (at_punct("[")) {
                NodeId m = make(NodeKind::MemberExpr, node(callee).first);
                node(m).flags |= kFlagComputed;
                pos++;
                NodeId prop = parse_expression(false);
                expect_punct("]");
                node(m).kids = {callee, prop};
                finish(m);
                callee = m;
            } else {
                break;
            }
        }
        NodeId n = make(NodeKind::NewExpr, first);
        std::vector<NodeId> kids{callee};
        if (at_punct("(")) {
            pos++;
            while (!at_punct(")")) {
                if (eof()) fail("unterminated argument list");
                kids.push_back(parse_argument());
                if (!eat_punct(",")) break;
            }
            expect_punct(")");
        }
        node(n).kids = std::move(kids);
        finish(n);
        return n;
    }

    NodeId parse_argument() {
        if (at_punct("...")) {
            NodeId s = make(NodeKind::SpreadElement, pos);
            pos++;
            node(s).kids.push_back(parse_assignment_expression(false));
            finish(s);
            return s;
        }
        return parse_assignment_expression(false);
    }

    NodeId parse_call_tail(NodeId expr) {
        while (true) {
            const Token* t = cur();
            if (!t) break;
            bool optional = t->isPunct("?.");
            if (optional) {
                const Token* n = peek();
                if (n && n->isPunct("(")) {
                    pos++;
                    expr = parse_call_arguments(expr, true);
                    continue;
                }
                if (n && n->isPunct("[")) {
                    pos += 2;
                    NodeId m = make(NodeKind::MemberExpr, node(expr).first);
                    node(m).flags |= kFlagComputed | kFlagOptionalChain;
                    NodeId prop = parse_expression(false);
                    expect_punct("]");
                    node(m).kids = {expr, prop};
                    finish(m);
                    expr = m;
                    continue;
                }
                NodeId m = make(NodeKind::MemberExpr, node(expr).first);
                node(m).flags |= kFlagOptionalChain;
                pos++;
                const Token* p = cur();
                if (!p || (p->kind != TokenKind::Identifier && p->kind != TokenKind::Keyword &&
                           p->kind != TokenKind::Boolean && p->kind != TokenKind::Null)) {
                    fail("expected property name");
                }
                node(m).auxToken = pos;
                pos++;
                node(m).kids = {expr};
                finish(m);
                expr = m;
                continue;
            }
            if (t->isPunct(".")) {
                NodeId m = make(NodeKind::MemberExpr, node(expr).first);
                pos++;
                const Token* p = cur();
                if (!p || (p->kind != TokenKind::Identifier && p->kind != TokenKind::Keyword &&
                           p->kind != TokenKind::Boolean && p->kind != TokenKind::Null)) {
                    fail("expected property name");
                }
                node(m).auxToken = pos;
                pos++;
                node(m).kids = {expr};
                finish(m);
                expr = m;
                continue;
            }
            if (t->isPunct("[")) {
                NodeId m = make(NodeKind::MemberExpr, node(expr).first);
                node(m).flags |= kFlagComputed;
                pos++;
                NodeId prop = parse_expression(false);
                expect_punct("]");
                node(m).kids = {expr, prop};
                finish(m);
                expr = m;
                continue;
            }
            if (t->isPunct("(")) {
                expr = parse_call_arguments(expr, false);
                continue;
            }
            if (t->kind == TokenKind::Template && t->text[0] == '`') {
                NodeId quasi = parse_template();
                NodeId tt = make(NodeKind::TaggedTemplate, node(expr).first);
                node(tt).kids = {expr, quasi};
                finish(tt);
                expr = tt;
                continue;
            }
            break;
        }
        return expr;
    }

    NodeId parse_call_arguments(NodeId callee, bool optional) {
        NodeId call = make(NodeKind::CallExpr, node(callee).first);
        if (optional) node(call).flags |= kFlagOptionalChain;
        expect_punct("(");
        std::vector<NodeId> kids{callee};
        while (!at_punct(")")) {
            if (eof()) fail("unterminated argument list");
            kids.push_back(parse_argument());
            if (!eat_punct(",")) break;
        }
        expect_punct(")");
        node(call).kids = std::move(kids);
        finish(call);
        return call;
    }

    NodeId parse_template() {
        NodeId n = make(NodeKind::TemplateLiteral, pos);
        while (true) {
            const Token* t = cur();
            if (!t || t->kind != TokenKind::Template) fail("expected template continuation");
            bool continues = t->text.size() >= 2 &&
                             t->text.compare(t->text.size() - 2, 2, "${") == 0;
            pos++;
            if (!continues) break;
            node(n).kids.push_back(parse_expression(false));
        }
        finish(n);
        return n;
    }

    NodeId parse_primary() {
        const Token* t = cur();
        if (!t) fail("expected expression");
        switch (t->kind) {
            case TokenKind::Numeric:
            case TokenKind::String:
            case TokenKind::Regex:
            case TokenKind::Boolean:
            case TokenKind::Null: {
                NodeId n = make(NodeKind::Literal, pos);
                pos++;
                finish(n);
                return n;
            }
            case TokenKind::Template:
                return parse_template();
            case TokenKind::Identifier: {
                if (t->isIdent("async")) {
                    const Token* n = peek();
                    if (n && n->isKeyword("function") && !n->newlineBefore) {
                        return parse_function(NodeKind::FunctionExpr);
                    }
                }
                NodeId n = make(NodeKind::Identifier, pos);
                node(n).nameToken = pos;
                pos++;
                finish(n);
                return n;
            }
            case TokenKind::Keyword: {
                if (t->text == "function") return parse_function(NodeKind::FunctionExpr);
                if (t->text == "class") return parse_class(NodeKind::ClassExpr);
                if (t->text == "this" || t->text == "import") {
                    NodeId n = make(NodeKind::Identifier, pos);
                    node(n).nameToken = pos;
                    pos++;
                    finish(n);
                    return n;
                }
                if (t->text == "super") {
                    NodeId n = make(NodeKind::Super, pos);
                    pos++;
                    finish(n);
                    return n;
                }
                if (t->text == "let" || t->text == "yield" || t->text == "await") {
                    // Tolerated as identifiers in expression position.
                    NodeId n = make(NodeKind::Identifier, pos);
                    node(n).nameToken = pos;
                    pos++;
                    finish(n);
                    return n;
                }
                fail("unexpected keyword '" + t->text + "'");
            }
            case TokenKind::Punctuator: {
                if (t->text == "(") {
                    NodeId n = make(NodeKind::ParenExpr, pos);
                    pos++;
                    NodeId inner = parse_expression(false);
                    expect_punct(")");
                    node(n).kids.push_back(inner);
                    finish(n);
                    return n;
                }
                if (t->text == "[") return parse_array_literal();
                if (t->text == "{") return parse_object_literal();
                fail("unexpected token '" + t->text + "'");
            }
            default:
                fail("unexpected token '" + t->text + "'");
        }
    }

    NodeId parse_array_literal() {
        NodeId n = make(NodeKind::ArrayLiteral, pos);
        pos++;
        std::vector<NodeId> elems;
        while (!at_punct("]")) {
            if (eof()) fail("unterminated array literal");
            if (at_punct(",")) {
                NodeId hole = make(NodeKind::Hole, pos);
                finish(hole);
                elems.push_back(hole);
                pos++;
                continue;
            }
            elems.push_back(parse_argument());
            if (!at_punct("]")) expect_punct(",");
        }
        pos++;
        node(n).kids = std::move(elems);
        finish(n);
        return n;
    }

    NodeId parse_object_literal() {
        NodeId n = make(NodeKind::ObjectLiteral, pos);
        pos++;
        std::vector<NodeId> props;
        while (!at_punct("}")) {
            if (eof()) fail("unterminated object literal");
            if (at_punct("...")) {
                NodeId s = make(NodeKind::SpreadElement, pos);
                pos++;
                node(s).kids.push_back(parse_assignment_expression(false));
                finish(s);
                props.push_back(s);
            } else {
                props.push_back(parse_object_member());
            }
            if (!eat_punct(",")) break;
        }
        expect_punct("}");
        node(n).kids = std::move(props);
        finish(n);
        return n;
    }

    NodeId parse_object_member() {
        int first = pos;
        uint32_t flags = 0;
        if (at_ident("async")) {
            const Token* n = peek();
            if (n && !n->isPunct("(") && !n->isPunct(":") && !n->isPunct(",") &&
                !n->isPunct("}") && !n->newlineBefore) {
                flags |= kFlagAsync;
                pos++;
            }
        }
        if (at_punct("*")) {
            flags |= kFlagGenerator;
            pos++;
        }
        if (at_ident("get") || at_ident("set")) {
            const Token* n = peek();
            if (n && !n->isPunct("(") && !n->isPunct(":") && !n->isPunct(",") &&
                !n->isPunct("}")) {
                flags |= at_ident("get") ? kFlagGetter : kFlagSetter;
                pos++;
            }
        }
        int nameToken = -1;
        NodeId computedKey = kNoNode;
        if (at_punct("[")) {
            flags |= kFlagComputed;
            pos++;
            computedKey = parse_assignment_expression(false);
            expect_punct("]");
        } else {
            const Token* t = cur();
            if (!t || (t->kind != TokenKind::Identifier && t->kind != TokenKind::Keyword &&
                       t->kind != TokenKind::String && t->kind != TokenKind::Numeric &&
                       t->kind != TokenKind::Boolean && t->kind != TokenKind::Null)) {
                fail("expected property name");
            }
            nameToken = pos;
            pos++;
        }
        if (at_punct("(")) {
            NodeId m = make(NodeKind::MethodDef, first);
            node(m).flags = flags;
            node(m).nameToken = nameToken;
            std::vector<NodeId> kids;
            if (computedKey != kNoNode) kids.push_back(computedKey);
            std::vector<NodeId> params = parse_params();
            kids.insert(kids.end(), params.begin(), params.end());
            maybe_annotation(m);
            kids.push_back(parse_block());
            node(m).kids = std::move(kids);
            finish(m);
            return m;
        }
        NodeId prop = make(NodeKind::Property, first);
        node(prop).flags = flags;
        node(prop).nameToken = nameToken;
        if (computedKey != kNoNode) node(prop).kids.push_back(computedKey);
        if (eat_punct(":")) {
            node(prop).kids.push_back(parse_assignment_expression(false));
        } else if (nameToken >= 0 && at_punct("=")) {
            // Shorthand with default, valid only inside destructuring.
            node(prop).flags |= kFlagShorthand;
            NodeId id = make(NodeKind::Identifier, nameToken);
            node(id).nameToken = nameToken;
            node(id).end = nameToken + 1;
            NodeId ap = make(NodeKind::AssignmentPattern, nameToken);
            pos++;
            node(ap).kids.push_back(id);
            node(ap).kids.push_back(parse_assignment_expression(false));
            finish(ap);
            node(prop).kids.push_back(ap);
        } else {
            node(prop).flags |= kFlagShorthand;
            NodeId id = make(NodeKind::Identifier, nameToken);
            node(id).nameToken = nameToken;
            node(id).end = nameToken + 1;
            node(prop).kids.push_back(id);
        }
        finish(prop);
        return prop;
    }
};

}  // namespace

Ast parse_program(TokenFile tokens) {
    Parser parser(std::move(tokens));
    parser.ast.root = parser.parse_program_node();
    return std::move(parser.ast);
}

Ast parse_program(std::string_view source) { return parse_program(lex(source)); }

bool parses(std::string_view source) {
    try {
        parse_program(source);
        return true;
    } catch (const LexError&) {
        return false;
    } catch (const ParseError&) {
        return false;
    }
}

}  // namespace tsweave::js
