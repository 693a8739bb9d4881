#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "tsweave/token.hpp"

namespace tsweave::js {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind : uint8_t {
    Program,
    // Statements
    VarStatement,
    Declarator,
    FunctionDecl,
    ClassDecl,
    PropertyDef,
    MethodDef,
    Block,
    ExpressionStatement,
    IfStatement,
    ForStatement,
    ForInStatement,
    ForOfStatement,
    WhileStatement,
    DoWhileStatement,
    SwitchStatement,
    SwitchCase,
    BreakStatement,
    ContinueStatement,
    ReturnStatement,
    ThrowStatement,
    TryStatement,
    CatchClause,
    LabeledStatement,
    EmptyStatement,
    DebuggerStatement,
    ImportDecl,
    ImportDefaultSpecifier,
    ImportNamespaceSpecifier,
    ImportSpecifier,
    ExportNamedDecl,
    ExportDefaultDecl,
    ExportAllDecl,
    ExportSpecifier,
    // Expressions
    Identifier,
    Literal,
    TemplateLiteral,
    TaggedTemplate,
    ArrayLiteral,
    ObjectLiteral,
    Property,
    FunctionExpr,
    ArrowFunction,
    ClassExpr,
    UnaryExpr,
    UpdateExpr,
    BinaryExpr,
    AssignExpr,
    ConditionalExpr,
    SequenceExpr,
    CallExpr,
    NewExpr,
    MemberExpr,
    SpreadElement,
    YieldExpr,
    AwaitExpr,
    ParenExpr,
    Super,
    // Patterns
    ObjectPattern,
    ArrayPattern,
    AssignmentPattern,
    RestElement,
    Param,
    // Placeholder for an absent slot in a fixed-position kid list
    Hole,
};

std::string_view to_string(NodeKind kind);

// Node flags
enum : uint32_t {
    kFlagComputed = 1u << 0,
    kFlagStatic = 1u << 1,
    kFlagAsync = 1u << 2,
    kFlagGenerator = 1u << 3,
    kFlagShorthand = 1u << 4,
    kFlagOptional = 1u << 5,   // parameter `?`
    kFlagGetter = 1u << 6,
    kFlagSetter = 1u << 7,
    kFlagPrefix = 1u << 8,     // prefix update expression
    kFlagDelegate = 1u << 9,   // yield*
    kFlagOptionalChain = 1u << 10,
    kFlagDeclare = 1u << 11,   // `declare` modifier (declaration files)
};

// A syntax node. Nodes reference the token stream by index; [first, end) is
// the half-open token range the node covers. Kid layout by kind:
//   Program            statements
//   VarStatement       declarators
//   Declarator         [target, init?]; nameToken set for identifier targets
//   FunctionDecl/Expr  params..., body (Block); nameToken (absent for exprs)
//   ArrowFunction      params..., body (Block or expression); auxToken = `=>`
//   MethodDef          params..., body; nameToken or computed key as kids[0]
//   PropertyDef        [key?][value?] per kFlagComputed / has-initializer
//   ClassDecl/Expr     [superclass or Hole, members...]
//   Param              [pattern]; nameToken set for identifier patterns
//   Block              statements
//   IfStatement        [cond, then, else or Hole]
//   ForStatement       [init or Hole, test or Hole, update or Hole, body]
//   ForIn/ForOf        [left, right, body]
//   While              [cond, body];  DoWhile  [body, cond]
//   Switch             [disc, cases...];  SwitchCase  [test or Hole, stmts...]
//   Return/Throw       [arg?] / [arg]
//   Try                [block, CatchClause or Hole, finally Block or Hole]
//   CatchClause        [param or Hole, body]
//   Labeled            [body]; nameToken = label
//   ImportDecl         specifiers...; nameToken = module string token
//   ImportSpecifier    nameToken = local, auxToken = imported (may equal)
//   ExportNamedDecl    [decl] or specifiers...; nameToken = source or -1
//   ExportDefaultDecl  [decl or expr]
//   ExportAllDecl      nameToken = source string token
//   ExportSpecifier    nameToken = local, auxToken = exported
//   Property           [key?][value]; nameToken for plain keys
//   Unary/Await/Spread [arg];  Update  [arg]
//   Binary/Assign      [left, right]; auxToken = operator token
//   Conditional        [test, consequent, alternate]
//   Sequence/Array/Object/Template  element kids
//   Call/New           [callee, args...]
//   Member             [object][property if computed]; auxToken = name token
//   TaggedTemplate     [tag, quasi]
//   AssignmentPattern  [target, default];  RestElement  [arg]
//
// Annotations (TypeScript subset): typeColon is the `:` token index and
// [typeColon+1, typeEnd) the annotation's tokens. Used on Declarator, Param,
// FunctionDecl/Expr/ArrowFunction/MethodDef (return type), PropertyDef.
struct Node {
    NodeKind kind = NodeKind::Hole;
    int first = -1;
    int end = -1;
    int nameToken = -1;
    int auxToken = -1;
    int typeColon = -1;
    int typeEnd = -1;
    uint32_t flags = 0;
    std::vector<NodeId> kids;

    bool has(uint32_t flag) const { return (flags & flag) != 0; }
};

// Nodes live in a deque so references stay valid while the tree grows.
struct Ast {
    TokenFile file;
    std::deque<Node> nodes;
    NodeId root = kNoNode;

    const Node& operator[](NodeId id) const { return nodes[static_cast<size_t>(id)]; }
    Node& operator[](NodeId id) { return nodes[static_cast<size_t>(id)]; }

    const Token& token(int index) const { return file.tokens[static_cast<size_t>(index)]; }

    Span span(NodeId id) const;
    Span token_span(int first, int end) const;

    // Source text slice covered by [firstToken, endToken), without the
    // leading trivia of the first token.
    std::string text_of(int firstToken, int endToken) const;
    std::string text_of(NodeId id) const;
};

// Depth-first walk over the whole tree, parents before kids.
void walk(const Ast& ast, NodeId from, const std::function<void(NodeId)>& visit);

}  // namespace tsweave::js
