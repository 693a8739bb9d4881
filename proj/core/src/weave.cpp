#include "tsweave/weave.hpp"

#include <fstream>

#include "tsweave/parser.hpp"
#include "tsweave/token_edit.hpp"
#include "tsweave/type_parser.hpp"
#include "json.hpp"

namespace tsweave {

namespace fs = std::filesystem;

const char* to_string(SiteKind k) {
    switch (k) {
        case SiteKind::VariableDeclaration: return "variable-declaration";
        case SiteKind::FunctionParameter: return "function-parameter";
        case SiteKind::FunctionResult: return "function-result";
    }
    return "?";
}

namespace {

class SiteCollector {
public:
    explicit SiteCollector(const js::Ast& ast) : ast(ast) {}

    std::vector<AnnotationSite> run() {
        if (ast.root != js::kNoNode) visit(ast.root, false);
        return std::move(sites);
    }

private:
    const js::Ast& ast;
    std::vector<AnnotationSite> sites;

    const js::Token& tok(int i) const { return ast.file.tokens[i]; }
    const js::Node& node(js::NodeId id) const { return ast.nodes[id]; }

    void visit(js::NodeId id, bool suppressVarSites) {
        const js::Node& n = node(id);
        switch (n.kind) {
            case js::NodeKind::VarStatement: {
                bool multi = n.kids.size() > 1;
                for (js::NodeId d : n.kids) {
                    if (!multi && !suppressVarSites) variable_site(n, d);
                    visit(d, false);
                }
                return;
            }
            case js::NodeKind::ForInStatement:
            case js::NodeKind::ForOfStatement:
                // An annotation on the loop variable is a compile error, so
                // the head contributes no sites.
                visit(n.kids[0], true);
                visit(n.kids[1], false);
                visit(n.kids[2], false);
                return;
            case js::NodeKind::FunctionDecl:
            case js::NodeKind::FunctionExpr:
            case js::NodeKind::MethodDef:
                named_function_sites(id);
                for (js::NodeId k : n.kids) visit(k, false);
                return;
            case js::NodeKind::ArrowFunction: {
                // Paren-less heads (`x => e`, `async x => e`) have no legal
                // position for a parameter or result annotation.
                int head = n.first;
                if (n.has(js::kFlagAsync) && !tok(head).isPunct("(")) ++head;
                if (tok(head).isPunct("(")) {
                    for (js::NodeId k : n.kids)
                        if (node(k).kind == js::NodeKind::Param) param_site(k);
                    arrow_result_site(id);
                }
                for (js::NodeId k : n.kids) visit(k, false);
                return;
            }
            default:
                for (js::NodeId k : n.kids) visit(k, false);
                return;
        }
    }

    void variable_site(const js::Node& stmt, js::NodeId declId) {
        const js::Node& d = node(declId);
        if (d.nameToken < 0 || d.typeColon >= 0) return;
        int kw = stmt.first + (stmt.has(js::kFlagDeclare) ? 1 : 0);
        AnnotationSite site;
        site.kind = SiteKind::VariableDeclaration;
        site.identifier = tok(d.nameToken).text;
        site.span = tok(d.nameToken).span;
        site.declarationTokens = {tok(kw).text, tok(d.nameToken).text};
        site.identifierRow = 1;
        site.insertAfterToken = d.nameToken;
        site.node = declId;
        sites.push_back(std::move(site));
    }

    void named_function_sites(js::NodeId id) {
        const js::Node& n = node(id);
        bool isConstructor = n.kind == js::NodeKind::MethodDef && !n.has(js::kFlagComputed) &&
                             n.nameToken >= 0 && tok(n.nameToken).text == "constructor";
        bool computedMethod = n.kind == js::NodeKind::MethodDef && n.has(js::kFlagComputed);
        if (n.typeColon < 0 && !isConstructor && !computedMethod && !n.has(js::kFlagSetter))
            result_site(id);
        for (js::NodeId k : n.kids)
            if (node(k).kind == js::NodeKind::Param) param_site(k);
    }

    void result_site(js::NodeId id) {
        const js::Node& n = node(id);
        js::NodeId body = n.kids.empty() ? js::kNoNode : n.kids.back();
        if (body == js::kNoNode || node(body).kind != js::NodeKind::Block) return;
        int closeParen = node(body).first - 1;
        if (!tok(closeParen).isPunct(")")) return;

        AnnotationSite site;
        site.kind = SiteKind::FunctionResult;
        site.insertAfterToken = closeParen;
        site.node = id;
        if (n.nameToken >= 0) {
            site.identifier = tok(n.nameToken).text;
            site.span = tok(n.nameToken).span;
            if (n.kind == js::NodeKind::MethodDef) {
                site.declarationTokens = {tok(n.nameToken).text, "("};
                site.identifierRow = 0;
            } else {
                for (int i = n.first; i <= n.nameToken; ++i)
                    site.declarationTokens.push_back(tok(i).text);
                site.identifierRow = int(site.declarationTokens.size()) - 1;
            }
        } else {
            // Anonymous: the `function` keyword stands in for the slot.
            int kw = n.first + (n.has(js::kFlagAsync) ? 1 : 0);
            site.span = tok(kw).span;
            site.declarationTokens = {tok(kw).text};
        }
        sites.push_back(std::move(site));
    }

    void arrow_result_site(js::NodeId id) {
        const js::Node& n = node(id);
        if (n.typeColon >= 0) return;
        int arrow = n.auxToken;
        if (arrow <= 0 || !tok(arrow - 1).isPunct(")")) return;

        AnnotationSite site;
        site.kind = SiteKind::FunctionResult;
        site.span = tok(arrow).span;
        for (int i = n.first; i <= arrow; ++i) site.declarationTokens.push_back(tok(i).text);
        site.insertAfterToken = arrow - 1;
        site.node = id;
        sites.push_back(std::move(site));
    }

    void param_site(js::NodeId id) {
        const js::Node& p = node(id);
        if (p.nameToken < 0 || p.typeColon >= 0 || p.has(js::kFlagOptional)) return;
        AnnotationSite site;
        site.kind = SiteKind::FunctionParameter;
        site.identifier = tok(p.nameToken).text;
        site.span = tok(p.nameToken).span;
        site.declarationTokens = {tok(p.nameToken - 1).text, tok(p.nameToken).text};
        site.identifierRow = 1;
        site.insertAfterToken = p.nameToken;
        site.node = id;
        sites.push_back(std::move(site));
    }
};

}  // namespace

std::vector<AnnotationSite> collect_sites(const js::Ast& ast) {
    return SiteCollector(ast).run();
}

WeavePlan plan_location_weave(const std::vector<AnnotationSite>& sites,
                              const LocationPredictionTable& table) {
    WeavePlan plan;
    size_t consumed = 0;
    for (size_t i = 0; i < sites.size(); ++i) {
        const js::Span& s = sites[i].span;
        auto it = table.entries.find(
            SpanKey{s.start.line, s.start.col, s.end.line, s.end.col});
        if (it == table.entries.end() || it->second.empty()) {
            plan.unmatchedSites.push_back(i);
            continue;
        }
        ++consumed;
        std::string type =
            normalize_type(it->second.front().type, PredictionFormat::LocationKeyed);
        if (ts::parses_as_type(type)) {
            plan.assignments.push_back({i, std::move(type)});
        } else {
            ++plan.invalidTypes;
            plan.unmatchedSites.push_back(i);
        }
    }
    plan.unusedPredictions = table.entries.size() - consumed;
    return plan;
}

WeavePlan plan_token_weave(const std::vector<AnnotationSite>& sites,
                           const TokenPredictionTable& table) {
    WeavePlan plan;
    size_t cursor = 0;
    std::vector<bool> consumedRow(table.rows.size(), false);
    for (size_t i = 0; i < sites.size(); ++i) {
        const AnnotationSite& site = sites[i];
        if (!site.identifier || site.identifierRow < 0) {
            plan.unmatchedSites.push_back(i);
            continue;
        }
        const auto& window = site.declarationTokens;
        size_t len = window.size();
        bool matched = false;
        for (size_t start = cursor; start + len <= table.rows.size() && !matched; ++start) {
            bool equal = true;
            for (size_t j = 0; j < len && equal; ++j)
                equal = table.rows[start + j].text == window[j];
            if (!equal) continue;
            matched = true;
            size_t rowIndex = start + size_t(site.identifierRow);
            cursor = start + len;
            const TokenPredictionRow& row = table.rows[rowIndex];
            if (row.candidates.empty()) {
                plan.unmatchedSites.push_back(i);
                continue;
            }
            consumedRow[rowIndex] = true;
            std::string type =
                normalize_type(row.candidates.front().type, PredictionFormat::TokenAligned);
            if (ts::parses_as_type(type)) {
                plan.assignments.push_back({i, std::move(type)});
            } else {
                ++plan.invalidTypes;
                plan.unmatchedSites.push_back(i);
            }
        }
        if (!matched) plan.unmatchedSites.push_back(i);
    }
    for (size_t r = 0; r < table.rows.size(); ++r)
        if (!table.rows[r].candidates.empty() && !consumedRow[r]) ++plan.unusedPredictions;
    return plan;
}

std::string apply_plan(const js::Ast& ast, const std::vector<AnnotationSite>& sites,
                       const WeavePlan& plan) {
    std::vector<js::TokenSplice> splices;
    splices.reserve(plan.assignments.size());
    for (const auto& a : plan.assignments)
        splices.push_back(
            js::TokenSplice::insert_after(sites[a.site].insertAfterToken, ": " + a.type));
    return js::apply_splices(ast.file, std::move(splices));
}

WeaveOutcome weave_with_plan(const SourceUnit& unit, const std::vector<AnnotationSite>& sites,
                             const WeavePlan& plan) {
    WeaveOutcome out;
    out.stats.sitesFound = sites.size();
    std::string woven = apply_plan(unit.ast, sites, plan);
    try {
        js::parse_program(woven);
        out.text = std::move(woven);
        out.stats.sitesAnnotated = plan.assignments.size();
    } catch (const std::exception&) {
        out.text = unit.text;
        out.stats.reverted = true;
    }
    out.stats.unmatched = out.stats.sitesFound - out.stats.sitesAnnotated;
    return out;
}

WeaveOutcome weave_location_keyed(const SourceUnit& unit, const LocationPredictionTable& table) {
    auto sites = collect_sites(unit.ast);
    return weave_with_plan(unit, sites, plan_location_weave(sites, table));
}

WeaveOutcome weave_token_aligned(const SourceUnit& unit, const TokenPredictionTable& table) {
    auto sites = collect_sites(unit.ast);
    return weave_with_plan(unit, sites, plan_token_weave(sites, table));
}

std::string woven_name(const std::string& relativePath) {
    if (relativePath.ends_with(".mjs"))
        return relativePath.substr(0, relativePath.size() - 4) + ".mts";
    if (relativePath.ends_with(".js"))
        return relativePath.substr(0, relativePath.size() - 3) + ".ts";
    return relativePath;
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

WeavePackageResult weave_package(const PackageUnit& pkg, const PredictionSet& predictions,
                                 const fs::path& outDir) {
    fs::create_directories(outDir);
    WeavePackageResult result;
    result.outDir = outDir;

    for (const SourceUnit& unit : pkg.files) {
        FileWeaveRecord record;
        record.file = woven_name(unit.relativePath);
        std::string text = unit.text;
        if (unit.parsed) {
            bool wove = false;
            if (predictions.format == PredictionFormat::TokenAligned) {
                if (auto it = predictions.token.find(unit.relativePath);
                    it != predictions.token.end()) {
                    WeaveOutcome outcome = weave_token_aligned(unit, it->second);
                    text = std::move(outcome.text);
                    record.stats = outcome.stats;
                    wove = true;
                }
            } else {
                if (auto it = predictions.location.find(unit.relativePath);
                    it != predictions.location.end()) {
                    WeaveOutcome outcome = weave_location_keyed(unit, it->second);
                    text = std::move(outcome.text);
                    record.stats = outcome.stats;
                    wove = true;
                }
            }
            if (!wove) {
                record.stats.sitesFound = collect_sites(unit.ast).size();
                record.stats.unmatched = record.stats.sitesFound;
            }
        }
        write_file(outDir / record.file, text);
        result.log.push_back(std::move(record));
    }

    if (fs::exists(pkg.rootDir / "package.json"))
        fs::copy_file(pkg.rootDir / "package.json", outDir / "package.json",
                      fs::copy_options::overwrite_existing);
    if (fs::exists(pkg.rootDir / "node_modules"))
        fs::copy(pkg.rootDir / "node_modules", outDir / "node_modules",
                 fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return result;
}

std::string weave_record(const FileWeaveRecord& record) {
    nlohmann::ordered_json j;
    j["file"] = record.file;
    j["sitesFound"] = record.stats.sitesFound;
    j["sitesAnnotated"] = record.stats.sitesAnnotated;
    j["unmatched"] = record.stats.unmatched;
    j["reverted"] = record.stats.reverted;
    return j.dump();
}

std::string strip_annotations(const js::Ast& ast) {
    std::vector<js::TokenSplice> splices;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        const js::Node& n = ast.nodes[id];
        if (n.typeColon >= 0) splices.push_back(js::TokenSplice::remove(n.typeColon, n.typeEnd));
    });
    return js::apply_splices(ast.file, std::move(splices));
}

}  // namespace tsweave
