#include "tsweave/convert.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "tsweave/parser.hpp"
#include "tsweave/token_edit.hpp"

namespace tsweave {

namespace fs = std::filesystem;

std::string_view to_string(ConversionStatus status) {
    switch (status) {
        case ConversionStatus::Converted: return "converted";
        case ConversionStatus::AlreadyEsm: return "already-esm";
        case ConversionStatus::SkippedDynamic: return "skipped-dynamic";
        case ConversionStatus::Failed: return "failed";
    }
    return "failed";
}

namespace {

bool is_identifier(const js::Ast& ast, js::NodeId id, std::string_view name) {
    if (id == js::kNoNode) return false;
    const js::Node& n = ast[id];
    return n.kind == js::NodeKind::Identifier && n.nameToken >= 0 &&
           ast.token(n.nameToken).text == name;
}

bool is_module_exports(const js::Ast& ast, js::NodeId id) {
    if (id == js::kNoNode) return false;
    const js::Node& n = ast[id];
    return n.kind == js::NodeKind::MemberExpr && !n.has(js::kFlagComputed) &&
           n.kids.size() == 1 && ast.token(n.auxToken).text == "exports" &&
           is_identifier(ast, n.kids[0], "module");
}

bool is_require_call(const js::Ast& ast, js::NodeId id) {
    const js::Node& n = ast[id];
    return n.kind == js::NodeKind::CallExpr && !n.kids.empty() &&
           is_identifier(ast, n.kids[0], "require");
}

// The string token of require('...'), or -1 when the call takes anything
// other than a single string literal.
int require_specifier(const js::Ast& ast, js::NodeId id) {
    const js::Node& n = ast[id];
    if (!is_require_call(ast, id) || n.kids.size() != 2) return -1;
    const js::Node& arg = ast[n.kids[1]];
    if (arg.kind != js::NodeKind::Literal) return -1;
    if (ast.token(arg.first).kind != js::TokenKind::String) return -1;
    return arg.first;
}

std::string string_value(const js::Token& tok) {
    if (tok.text.size() < 2) return tok.text;
    return tok.text.substr(1, tok.text.size() - 2);
}

bool is_relative(const std::string& spec) {
    return spec.rfind("./", 0) == 0 || spec.rfind("../", 0) == 0;
}

struct FileConverter {
    const js::Ast& ast;
    std::vector<js::TokenSplice> splices;
    std::vector<std::pair<int, int>> replaced;
    std::set<js::NodeId> resolved;
    std::set<std::string> claimed;
    std::vector<std::string> dynamic;
    std::vector<std::string> notes;
    std::vector<std::string> reexported;
    std::vector<js::NodeId> parents;

    struct PendingImport {
        js::NodeId statement;
        std::string name;
        int specToken;
    };
    std::vector<PendingImport> pending;

    explicit FileConverter(const js::Ast& a) : ast(a) {
        parents.assign(ast.nodes.size(), js::kNoNode);
        js::walk(ast, ast.root, [&](js::NodeId id) {
            for (js::NodeId kid : ast[id].kids)
                if (kid != js::kNoNode) parents[static_cast<size_t>(kid)] = id;
        });
    }

    const js::Node& node(js::NodeId id) const { return ast[id]; }
    js::NodeId parent(js::NodeId id) const { return parents[static_cast<size_t>(id)]; }

    size_t line_of(js::NodeId id) const { return ast.token(node(id).first).span.start.line; }

    bool in_replaced(int tokenIndex) const {
        for (const auto& [first, end] : replaced)
            if (tokenIndex >= first && tokenIndex < end) return true;
        return false;
    }

    void replace_statement(js::NodeId stmt, std::string text) {
        const js::Node& s = node(stmt);
        splices.push_back(js::TokenSplice::replace(s.first, s.end, std::move(text)));
        replaced.emplace_back(s.first, s.end);
    }

    void plan_statements() {
        for (js::NodeId stmt : node(ast.root).kids) {
            const js::Node& s = node(stmt);
            if (s.kind == js::NodeKind::ExpressionStatement) {
                plan_expression_statement(stmt);
            } else if (s.kind == js::NodeKind::VarStatement) {
                plan_var_statement(stmt);
            }
        }
    }

    void plan_expression_statement(js::NodeId stmt) {
        js::NodeId exprId = node(stmt).kids[0];
        const js::Node& expr = node(exprId);

        if (expr.kind == js::NodeKind::CallExpr && require_specifier(ast, exprId) >= 0) {
            const js::Token& spec = ast.token(require_specifier(ast, exprId));
            replace_statement(stmt, "import " + spec.text + ";");
            return;
        }

        if (expr.kind != js::NodeKind::AssignExpr) return;
        if (ast.token(expr.auxToken).text != "=") return;
        js::NodeId lhsId = expr.kids[0];
        const js::Node& lhs = node(lhsId);

        if (is_module_exports(ast, lhsId)) {
            js::NodeId rhsId = expr.kids[1];
            int specTok = require_specifier(ast, rhsId);
            if (specTok >= 0) {
                const js::Token& spec = ast.token(specTok);
                std::string text = "export * from " + spec.text + ";";
                if (is_relative(string_value(spec))) {
                    reexported.push_back(string_value(spec));
                } else {
                    text += "\nexport {default} from " + spec.text + ";";
                    notes.push_back("re-exported external module " + spec.text +
                                    "; a commonjs default export is assumed");
                }
                replace_statement(stmt, std::move(text));
            } else {
                splices.push_back(
                    js::TokenSplice::replace(lhs.first, lhs.auxToken + 1, "export default"));
                splices.push_back(js::TokenSplice::remove(expr.auxToken, expr.auxToken + 1));
                resolved.insert(lhsId);
                resolved.insert(lhs.kids[0]);
            }
            return;
        }

        if (lhs.kind == js::NodeKind::MemberExpr && !lhs.has(js::kFlagComputed)) {
            const js::Token& name = ast.token(lhs.auxToken);
            if (is_module_exports(ast, lhs.kids[0])) {
                splices.push_back(js::TokenSplice::replace(lhs.first, lhs.auxToken + 1,
                                                           "export var " + name.text));
                js::NodeId moduleExports = lhs.kids[0];
                resolved.insert(moduleExports);
                resolved.insert(node(moduleExports).kids[0]);
                claimed.insert(name.text);
            } else if (is_identifier(ast, lhs.kids[0], "exports")) {
                splices.push_back(js::TokenSplice::replace(lhs.first, lhs.auxToken + 1,
                                                           "export var " + name.text));
                resolved.insert(lhs.kids[0]);
                claimed.insert(name.text);
            }
        }
    }

    void plan_var_statement(js::NodeId stmt) {
        const js::Node& s = node(stmt);
        if (s.kids.size() != 1) return;
        const js::Node& decl = node(s.kids[0]);
        if (decl.kids.size() != 2) return;
        js::NodeId target = decl.kids[0];
        int specTok = require_specifier(ast, decl.kids[1]);
        if (specTok < 0) return;

        if (node(target).kind == js::NodeKind::Identifier) {
            std::string name = ast.token(node(target).nameToken).text;
            claimed.insert(name);
            pending.push_back({stmt, std::move(name), specTok});
            return;
        }
        if (node(target).kind == js::NodeKind::ObjectPattern) {
            plan_destructured_import(stmt, target, specTok);
            return;
        }
        dynamic.push_back("unsupported binding pattern for require at line " +
                          std::to_string(line_of(stmt)));
    }

    void plan_destructured_import(js::NodeId stmt, js::NodeId pattern, int specTok) {
        std::vector<std::string> items;
        for (js::NodeId propId : node(pattern).kids) {
            const js::Node& prop = node(propId);
            if (prop.kind != js::NodeKind::Property || prop.has(js::kFlagComputed) ||
                prop.kids.size() != 1) {
                dynamic.push_back("unsupported binding pattern for require at line " +
                                  std::to_string(line_of(stmt)));
                return;
            }
            const js::Token& key = ast.token(prop.nameToken);
            if (key.kind != js::TokenKind::Identifier && key.kind != js::TokenKind::Keyword) {
                dynamic.push_back("unsupported binding pattern for require at line " +
                                  std::to_string(line_of(stmt)));
                return;
            }
            const js::Node& value = node(prop.kids[0]);
            if (value.kind != js::NodeKind::Identifier) {
                dynamic.push_back("unsupported binding pattern for require at line " +
                                  std::to_string(line_of(stmt)));
                return;
            }
            std::string local = ast.token(value.nameToken).text;
            items.push_back(prop.has(js::kFlagShorthand) ? key.text
                                                         : key.text + " as " + local);
            claimed.insert(local);
        }
        std::string list;
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) list += ",";
            list += items[i];
        }
        replace_statement(stmt,
                          "import {" + list + "} from " + ast.token(specTok).text + ";");
    }

    // Decides named vs. namespace import for `var X = require('m')` by
    // looking at every use of X: when each one is a static property read,
    // the properties become named imports and the accesses lose their `X.`
    // prefix.
    void resolve_pending() {
        for (const auto& p : pending) {
            const js::Node& stmt = node(p.statement);
            std::vector<js::NodeId> uses;
            bool named = true;

            js::walk(ast, ast.root, [&](js::NodeId id) {
                const js::Node& n = node(id);
                if ((n.kind == js::NodeKind::FunctionDecl ||
                     n.kind == js::NodeKind::FunctionExpr ||
                     n.kind == js::NodeKind::ClassDecl || n.kind == js::NodeKind::ClassExpr) &&
                    n.nameToken >= 0 && ast.token(n.nameToken).text == p.name) {
                    named = false;
                }
                if (!is_identifier(ast, id, p.name)) return;
                if (n.first >= stmt.first && n.first < stmt.end) return;
                js::NodeId par = parent(id);
                if (par == js::kNoNode || node(par).kind != js::NodeKind::MemberExpr ||
                    node(par).has(js::kFlagComputed) || node(par).kids[0] != id) {
                    named = false;
                    return;
                }
                if (in_replaced(node(par).first)) {
                    named = false;
                    return;
                }
                js::NodeId gp = parent(par);
                if (gp != js::kNoNode) {
                    const js::Node& g = node(gp);
                    bool written =
                        (g.kind == js::NodeKind::AssignExpr && g.kids[0] == par) ||
                        g.kind == js::NodeKind::UpdateExpr ||
                        (g.kind == js::NodeKind::UnaryExpr &&
                         ast.token(g.first).text == "delete");
                    if (written) {
                        named = false;
                        return;
                    }
                }
                uses.push_back(par);
            });

            std::vector<std::string> props;
            if (named && !uses.empty()) {
                std::sort(uses.begin(), uses.end(), [&](js::NodeId a, js::NodeId b) {
                    return node(a).first < node(b).first;
                });
                std::set<int> useNameTokens;
                for (js::NodeId use : uses) {
                    std::string prop = ast.token(node(use).auxToken).text;
                    useNameTokens.insert(node(use).auxToken);
                    if (std::find(props.begin(), props.end(), prop) == props.end())
                        props.push_back(prop);
                }
                named = !collides(props, stmt, useNameTokens);
            } else {
                named = false;
            }

            const std::string& spec = ast.token(p.specToken).text;
            if (named) {
                std::string list;
                for (size_t i = 0; i < props.size(); ++i) {
                    if (i) list += ",";
                    list += props[i];
                }
                replace_statement(p.statement, "import {" + list + "} from " + spec + ";");
                for (js::NodeId use : uses) {
                    const js::Node& m = node(use);
                    splices.push_back(js::TokenSplice::replace(m.first, m.auxToken + 1,
                                                               ast.token(m.auxToken).text));
                }
                for (const auto& prop : props) claimed.insert(prop);
            } else {
                replace_statement(p.statement, "import " + p.name + " from " + spec + ";");
            }
        }
    }

    // A property can only become a top-level named import when no binding or
    // reference in the file answers to that name. Property names and object
    // keys do not count; they live in their own namespace.
    bool collides(const std::vector<std::string>& props, const js::Node& stmt,
                  const std::set<int>& useNameTokens) const {
        for (const auto& prop : props)
            if (claimed.count(prop)) return true;
        bool hit = false;
        js::walk(ast, ast.root, [&](js::NodeId id) {
            const js::Node& n = node(id);
            bool binds = n.kind == js::NodeKind::Identifier ||
                         n.kind == js::NodeKind::ImportSpecifier ||
                         n.kind == js::NodeKind::ImportDefaultSpecifier ||
                         n.kind == js::NodeKind::ImportNamespaceSpecifier ||
                         n.kind == js::NodeKind::FunctionDecl ||
                         n.kind == js::NodeKind::FunctionExpr ||
                         n.kind == js::NodeKind::ClassDecl ||
                         n.kind == js::NodeKind::ClassExpr;
            if (!binds || n.nameToken < 0) return;
            if (n.nameToken >= stmt.first && n.nameToken < stmt.end) return;
            if (useNameTokens.count(n.nameToken)) return;
            if (in_replaced(n.nameToken)) return;
            const std::string& text = ast.token(n.nameToken).text;
            if (std::find(props.begin(), props.end(), text) != props.end()) hit = true;
        });
        return hit;
    }

    void check_residual() {
        js::walk(ast, ast.root, [&](js::NodeId id) {
            const js::Node& n = node(id);
            if (in_replaced(n.first) || resolved.count(id)) return;
            if (is_require_call(ast, id)) {
                if (require_specifier(ast, id) >= 0) {
                    dynamic.push_back("require call at line " + std::to_string(line_of(id)) +
                                      " is not a convertible statement");
                } else {
                    dynamic.push_back("require with a computed specifier at line " +
                                      std::to_string(line_of(id)));
                }
                return;
            }
            if (n.kind == js::NodeKind::MemberExpr && is_module_exports(ast, id)) {
                dynamic.push_back("module.exports referenced at line " +
                                  std::to_string(line_of(id)) +
                                  " outside a top-level assignment");
                return;
            }
            if (n.kind != js::NodeKind::Identifier || n.nameToken < 0) return;
            const std::string& name = ast.token(n.nameToken).text;
            js::NodeId par = parent(id);
            if (name == "require") {
                bool isCallee = par != js::kNoNode &&
                                node(par).kind == js::NodeKind::CallExpr &&
                                !node(par).kids.empty() && node(par).kids[0] == id;
                if (!isCallee)
                    dynamic.push_back("require used as a value at line " +
                                      std::to_string(line_of(id)));
            } else if (name == "exports") {
                dynamic.push_back("exports referenced at line " + std::to_string(line_of(id)) +
                                  " outside a top-level assignment");
            } else if (name == "module") {
                if (par != js::kNoNode && is_module_exports(ast, par)) return;
                dynamic.push_back("module referenced at line " + std::to_string(line_of(id)));
            }
        });
    }
};

std::vector<std::string> dedup_capped(const std::vector<std::string>& reasons) {
    std::vector<std::string> out;
    for (const auto& r : reasons)
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    constexpr size_t kCap = 8;
    if (out.size() > kCap) {
        size_t extra = out.size() - kCap;
        out.resize(kCap);
        out.push_back("and " + std::to_string(extra) + " more");
    }
    return out;
}

bool commonjs_free(const js::Ast& ast) {
    bool clean = true;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        if (is_require_call(ast, id) || is_module_exports(ast, id)) clean = false;
    });
    return clean;
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

ConversionOutcome convert_file(const SourceUnit& unit) {
    ConversionOutcome outcome;
    outcome.file = unit.relativePath;

    if (!unit.parsed) {
        outcome.status = ConversionStatus::Failed;
        outcome.notes.push_back("parse error: " + unit.parseError);
        return outcome;
    }

    FileConverter conv(unit.ast);
    conv.plan_statements();
    conv.resolve_pending();
    conv.check_residual();

    if (!conv.dynamic.empty()) {
        outcome.status = ConversionStatus::SkippedDynamic;
        outcome.notes = dedup_capped(conv.dynamic);
        return outcome;
    }
    if (conv.splices.empty()) {
        outcome.status = ConversionStatus::AlreadyEsm;
        return outcome;
    }

    std::string rewritten = js::apply_splices(unit.ast.file, std::move(conv.splices));
    try {
        js::Ast reparsed = js::parse_program(rewritten);
        if (!commonjs_free(reparsed)) {
            outcome.status = ConversionStatus::Failed;
            outcome.notes.push_back("rewrite left commonjs constructs behind");
            return outcome;
        }
    } catch (const std::exception& e) {
        outcome.status = ConversionStatus::Failed;
        outcome.notes.push_back(std::string("rewrite produced unparseable text: ") + e.what());
        return outcome;
    }

    outcome.status = ConversionStatus::Converted;
    outcome.rewrittenText = std::move(rewritten);
    outcome.notes = dedup_capped(conv.notes);
    outcome.reexported = std::move(conv.reexported);
    return outcome;
}

std::string converted_name(const std::string& relativePath) {
    if (relativePath.ends_with(".js"))
        return relativePath.substr(0, relativePath.size() - 3) + ".mjs";
    return relativePath;
}

namespace {

// Resolves a relative import specifier against the importing file, trying
// the bare path, then `.js`, then `/index.js`, the way require does.
std::optional<std::string> resolve_local(const std::string& fromFile, const std::string& spec,
                                         const std::set<std::string>& known,
                                         std::string* suffixOut) {
    fs::path base = fs::path(fromFile).parent_path();
    std::string joined = (base / spec).lexically_normal().generic_string();
    if (known.count(joined)) {
        *suffixOut = "";
        return joined;
    }
    if (known.count(joined + ".js")) {
        *suffixOut = ".js";
        return joined + ".js";
    }
    if (known.count(joined + "/index.js")) {
        *suffixOut = "/index.js";
        return joined + "/index.js";
    }
    return std::nullopt;
}

bool has_default_export(const std::string& text) {
    js::Ast ast = js::parse_program(text);
    bool found = false;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        const js::Node& n = ast[id];
        if (n.kind == js::NodeKind::ExportDefaultDecl) found = true;
        if (n.kind == js::NodeKind::ExportSpecifier && n.auxToken >= 0 &&
            ast.token(n.auxToken).text == "default") {
            found = true;
        }
    });
    return found;
}

}  // namespace

ConvertPackageResult convert_package(const PackageUnit& pkg, const fs::path& outDir) {
    ConvertPackageResult result;
    result.outDir = outDir;
    for (const auto& unit : pkg.files) result.outcomes.push_back(convert_file(unit));

    std::map<std::string, std::string> renamed;
    std::set<std::string> knownFiles;
    std::map<std::string, ConversionOutcome*> byFile;
    for (auto& o : result.outcomes) {
        knownFiles.insert(o.file);
        byFile[o.file] = &o;
        if (o.status == ConversionStatus::Converted) {
            std::string name = converted_name(o.file);
            if (name != o.file) renamed[o.file] = name;
        }
    }

    // Local re-export chains pick up their target's default export once it
    // exists. Chains of chains settle over repeated passes.
    for (bool changed = true; changed;) {
        changed = false;
        for (auto& o : result.outcomes) {
            if (o.status != ConversionStatus::Converted) continue;
            std::vector<std::string> remaining;
            for (const auto& spec : o.reexported) {
                std::string suffix;
                auto target = resolve_local(o.file, spec, knownFiles, &suffix);
                const ConversionOutcome* t = target ? byFile[*target] : nullptr;
                if (t && t->status == ConversionStatus::Converted && t->rewrittenText &&
                    has_default_export(*t->rewrittenText)) {
                    std::string& text = *o.rewrittenText;
                    if (!text.empty() && text.back() != '\n') text += '\n';
                    text += "export {default} from '" + spec + "';\n";
                    changed = true;
                } else {
                    remaining.push_back(spec);
                }
            }
            o.reexported = std::move(remaining);
        }
    }

    // Specifier pass: once renames are known, update import sources that
    // point at renamed files. Untouched packages stay byte-identical.
    if (!renamed.empty()) {
        for (size_t i = 0; i < result.outcomes.size(); ++i) {
            ConversionOutcome& o = result.outcomes[i];
            if (o.status != ConversionStatus::Converted &&
                o.status != ConversionStatus::AlreadyEsm)
                continue;
            const std::string& text =
                o.rewrittenText ? *o.rewrittenText : pkg.files[i].text;
            js::Ast ast = js::parse_program(text);
            std::vector<js::TokenSplice> splices;
            js::walk(ast, ast.root, [&](js::NodeId id) {
                const js::Node& n = ast[id];
                bool hasSource = (n.kind == js::NodeKind::ImportDecl ||
                                  n.kind == js::NodeKind::ExportAllDecl ||
                                  n.kind == js::NodeKind::ExportNamedDecl) &&
                                 n.nameToken >= 0;
                if (!hasSource) return;
                const js::Token& tok = ast.token(n.nameToken);
                if (tok.kind != js::TokenKind::String) return;
                std::string spec = string_value(tok);
                if (!is_relative(spec)) return;
                std::string suffix;
                auto target = resolve_local(o.file, spec, knownFiles, &suffix);
                if (!target || !renamed.count(*target)) return;
                std::string updated;
                if (suffix.empty()) {
                    updated = spec.substr(0, spec.size() - 3) + ".mjs";
                } else if (suffix == ".js") {
                    updated = spec + ".mjs";
                } else {
                    updated = spec + "/index.mjs";
                }
                char quote = tok.text.front();
                splices.push_back(js::TokenSplice::replace(n.nameToken, n.nameToken + 1,
                                                           quote + updated + quote));
            });
            if (splices.empty()) continue;
            std::string updated = js::apply_splices(ast.file, std::move(splices));
            o.rewrittenText = std::move(updated);
            if (o.status == ConversionStatus::AlreadyEsm)
                o.notes.push_back("updated import specifiers for renamed local files");
        }
    }

    fs::create_directories(outDir);
    fs::copy(pkg.rootDir, outDir,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    for (const auto& o : result.outcomes) {
        if (o.status == ConversionStatus::Converted) {
            std::string name = converted_name(o.file);
            if (name != o.file) fs::remove(outDir / o.file);
            write_file(outDir / name, *o.rewrittenText);
        } else if (o.status == ConversionStatus::AlreadyEsm && o.rewrittenText) {
            write_file(outDir / o.file, *o.rewrittenText);
        }
    }

    result.package = scan_package(outDir, pkg.hasDeclarations);
    return result;
}

std::string conversion_record(const ConversionOutcome& outcome) {
    nlohmann::ordered_json record;
    record["file"] = outcome.file;
    record["status"] = std::string(to_string(outcome.status));
    record["notes"] = outcome.notes;
    return record.dump();
}

}  // namespace tsweave
