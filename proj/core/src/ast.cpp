#include "tsweave/ast.hpp"

namespace tsweave::js {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Program: return "Program";
        case NodeKind::VarStatement: return "VarStatement";
        case NodeKind::Declarator: return "Declarator";
        case NodeKind::FunctionDecl: return "FunctionDecl";
        case NodeKind::ClassDecl: return "ClassDecl";
        case NodeKind::PropertyDef: return "PropertyDef";
        case NodeKind::MethodDef: return "MethodDef";
        case NodeKind::Block: return "Block";
        case NodeKind::ExpressionStatement: return "ExpressionStatement";
        case NodeKind::IfStatement: return "IfStatement";
        case NodeKind::ForStatement: return "ForStatement";
        case NodeKind::ForInStatement: return "ForInStatement";
        case NodeKind::ForOfStatement: return "ForOfStatement";
        case NodeKind::WhileStatement: return "WhileStatement";
        case NodeKind::DoWhileStatement: return "DoWhileStatement";
        case NodeKind::SwitchStatement: return "SwitchStatement";
        case NodeKind::SwitchCase: return "SwitchCase";
        case NodeKind::BreakStatement: return "BreakStatement";
        case NodeKind::ContinueStatement: return "ContinueStatement";
        case NodeKind::ReturnStatement: return "ReturnStatement";
        case NodeKind::ThrowStatement: return "ThrowStatement";
        case NodeKind::TryStatement: return "TryStatement";
        case NodeKind::CatchClause: return "CatchClause";
        case NodeKind::LabeledStatement: return "LabeledStatement";
        case NodeKind::EmptyStatement: return "EmptyStatement";
        case NodeKind::DebuggerStatement: return "DebuggerStatement";
        case NodeKind::ImportDecl: return "ImportDecl";
        case NodeKind::ImportDefaultSpecifier: return "ImportDefaultSpecifier";
        case NodeKind::ImportNamespaceSpecifier: return "ImportNamespaceSpecifier";
        case NodeKind::ImportSpecifier: return "ImportSpecifier";
        case NodeKind::ExportNamedDecl: return "ExportNamedDecl";
        case NodeKind::ExportDefaultDecl: return "ExportDefaultDecl";
        case NodeKind::ExportAllDecl: return "ExportAllDecl";
        case NodeKind::ExportSpecifier: return "ExportSpecifier";
        case NodeKind::Identifier: return "Identifier";
        case NodeKind::Literal: return "Literal";
        case NodeKind::TemplateLiteral: return "TemplateLiteral";
        case NodeKind::TaggedTemplate: return "TaggedTemplate";
        case NodeKind::ArrayLiteral: return "ArrayLiteral";
        case NodeKind::ObjectLiteral: return "ObjectLiteral";
        case NodeKind::Property: return "Property";
        case NodeKind::FunctionExpr: return "FunctionExpr";
        case NodeKind::ArrowFunction: return "ArrowFunction";
        case NodeKind::ClassExpr: return "ClassExpr";
        case NodeKind::UnaryExpr: return "UnaryExpr";
        case NodeKind::UpdateExpr: return "UpdateExpr";
        case NodeKind::BinaryExpr: return "BinaryExpr";
        case NodeKind::AssignExpr: return "AssignExpr";
        case NodeKind::ConditionalExpr: return "ConditionalExpr";
        case NodeKind::SequenceExpr: return "SequenceExpr";
        case NodeKind::CallExpr: return "CallExpr";
        case NodeKind::NewExpr: return "NewExpr";
        case NodeKind::MemberExpr: return "MemberExpr";
        case NodeKind::SpreadElement: return "SpreadElement";
        case NodeKind::YieldExpr: return "YieldExpr";
        case NodeKind::AwaitExpr: return "AwaitExpr";
        case NodeKind::ParenExpr: return "ParenExpr";
        case NodeKind::Super: return "Super";
        case NodeKind::ObjectPattern: return "ObjectPattern";
        case NodeKind::ArrayPattern: return "ArrayPattern";
        case NodeKind::AssignmentPattern: return "AssignmentPattern";
        case NodeKind::RestElement: return "RestElement";
        case NodeKind::Param: return "Param";
        case NodeKind::Hole: return "Hole";
    }
    return "Unknown";
}

Span Ast::token_span(int first, int end) const {
    if (first < 0 || first >= end || static_cast<size_t>(end) > file.tokens.size()) {
        return Span{};
    }
    return Span{file.tokens[static_cast<size_t>(first)].span.start,
                file.tokens[static_cast<size_t>(end - 1)].span.end};
}

Span Ast::span(NodeId id) const {
    const Node& n = (*this)[id];
    return token_span(n.first, n.end);
}

std::string Ast::text_of(int firstToken, int endToken) const {
    std::string out;
    for (int i = firstToken; i < endToken; i++) {
        const Token& t = file.tokens[static_cast<size_t>(i)];
        if (i > firstToken) out += t.leading;
        out += t.text;
    }
    return out;
}

std::string Ast::text_of(NodeId id) const {
    const Node& n = (*this)[id];
    return text_of(n.first, n.end);
}

void walk(const Ast& ast, NodeId from, const std::function<void(NodeId)>& visit) {
    if (from == kNoNode) return;
    visit(from);
    for (NodeId kid : ast[from].kids) walk(ast, kid, visit);
}

}  // namespace tsweave::js
