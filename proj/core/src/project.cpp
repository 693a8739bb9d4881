#include "tsweave/project.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tsweave/lexer.hpp"
#include "tsweave/parser.hpp"
#include "json.hpp"

namespace tsweave {

namespace fs = std::filesystem;

const char* to_string(PackageCategory c) {
    switch (c) {
        case PackageCategory::DefinitelyTypedNoDeps: return "DefinitelyTyped-no-deps";
        case PackageCategory::DefinitelyTypedWithDeps: return "DefinitelyTyped-with-deps";
        case PackageCategory::NeverTypedNoDeps: return "NeverTyped-no-deps";
        case PackageCategory::NeverTypedWithDeps: return "NeverTyped-with-deps";
    }
    return "?";
}

const char* to_string(ModuleSystem m) {
    switch (m) {
        case ModuleSystem::CommonJs: return "commonjs";
        case ModuleSystem::Esm: return "esm";
        case ModuleSystem::Mixed: return "mixed";
    }
    return "?";
}

PackageCategory categorize(bool hasDeclarations, bool hasDependencies) {
    if (hasDeclarations)
        return hasDependencies ? PackageCategory::DefinitelyTypedWithDeps
                               : PackageCategory::DefinitelyTypedNoDeps;
    return hasDependencies ? PackageCategory::NeverTypedWithDeps
                           : PackageCategory::NeverTypedNoDeps;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

bool is_identifier_named(const js::Ast& ast, js::NodeId id, std::string_view name) {
    if (id == js::kNoNode) return false;
    const js::Node& n = ast.nodes[id];
    if (n.kind != js::NodeKind::Identifier || n.nameToken < 0) return false;
    return ast.file.tokens[n.nameToken].text == name;
}

struct ModuleMarkers {
    bool cjs = false;
    bool esm = false;
};

ModuleMarkers detect_markers(const js::Ast& ast) {
    ModuleMarkers m;
    js::walk(ast, ast.root, [&](js::NodeId id) {
        const js::Node& n = ast.nodes[id];
        switch (n.kind) {
            case js::NodeKind::ImportDecl:
            case js::NodeKind::ExportNamedDecl:
            case js::NodeKind::ExportDefaultDecl:
            case js::NodeKind::ExportAllDecl:
                m.esm = true;
                break;
            case js::NodeKind::CallExpr:
                if (!n.kids.empty() && is_identifier_named(ast, n.kids[0], "require")) m.cjs = true;
                break;
            case js::NodeKind::MemberExpr:
                if (!n.kids.empty() && (is_identifier_named(ast, n.kids[0], "module") ||
                                        is_identifier_named(ast, n.kids[0], "exports")))
                    m.cjs = true;
                break;
            default:
                break;
        }
    });
    return m;
}

bool skipped_directory(const fs::path& name) {
    std::string s = name.string();
    return s == "node_modules" || (!s.empty() && s[0] == '.');
}

SourceUnit load_source(const fs::path& root, const fs::path& abs) {
    SourceUnit unit;
    unit.relativePath = fs::relative(abs, root).generic_string();
    unit.text = read_file(abs);
    if (abs.extension() == ".jsx") {
        unit.parseError = "jsx is not supported";
        return unit;
    }
    try {
        unit.ast = js::parse_program(unit.text);
        unit.parsed = true;
    } catch (const js::LexError& e) {
        unit.parseError = e.what();
    } catch (const js::ParseError& e) {
        unit.parseError = e.what();
    }
    return unit;
}

}  // namespace

PackageUnit scan_package(const fs::path& rootDir, bool declarationsAvailable) {
    PackageUnit pkg;
    pkg.rootDir = rootDir;
    pkg.name = rootDir.filename().string();
    pkg.hasDeclarations = declarationsAvailable;

    bool haveManifest = fs::exists(rootDir / "package.json");
    if (haveManifest) {
        try {
            auto manifest = nlohmann::json::parse(read_file(rootDir / "package.json"));
            if (manifest.contains("name") && manifest["name"].is_string())
                pkg.name = manifest["name"].get<std::string>();
            if (manifest.contains("dependencies") && manifest["dependencies"].is_object())
                pkg.hasDependencies = !manifest["dependencies"].empty();
        } catch (const nlohmann::json::exception&) {
            // Unreadable manifest: keep the directory-name fallback and no deps.
        }
    }

    for (fs::recursive_directory_iterator it(rootDir), end; it != end; ++it) {
        if (it->is_directory()) {
            if (skipped_directory(it->path().filename())) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        std::string name = it->path().filename().string();
        if (name.ends_with(".d.ts") || name.ends_with(".d.mts")) {
            pkg.hasDeclarations = true;
            continue;
        }
        auto ext = it->path().extension();
        if (ext == ".js" || ext == ".mjs" || ext == ".jsx" || ext == ".ts" || ext == ".mts")
            pkg.files.push_back(load_source(rootDir, it->path()));
    }
    std::sort(pkg.files.begin(), pkg.files.end(),
              [](const SourceUnit& a, const SourceUnit& b) { return a.relativePath < b.relativePath; });

    if (!haveManifest && pkg.files.empty()) throw NotAPackage(rootDir.string());

    bool sawCjs = false;
    bool sawEsm = false;
    for (const SourceUnit& f : pkg.files) {
        if (!f.parsed) continue;
        ModuleMarkers m = detect_markers(f.ast);
        sawCjs |= m.cjs;
        sawEsm |= m.esm;
    }
    pkg.moduleSystem = sawCjs && sawEsm ? ModuleSystem::Mixed
                       : sawEsm        ? ModuleSystem::Esm
                                       : ModuleSystem::CommonJs;
    pkg.category = categorize(pkg.hasDeclarations, pkg.hasDependencies);
    return pkg;
}

namespace {

bool test_file_name(const std::string& name) {
    if (name == "test.js" || name == "tests.js") return true;
    if (name.starts_with("test-") && name.ends_with(".js")) return true;
    return name.ends_with("-test.js") || name.ends_with(".test.js") || name.ends_with(".spec.js");
}

bool test_path(const std::string& relativePath) {
    size_t start = 0;
    while (true) {
        size_t slash = relativePath.find('/', start);
        std::string segment = relativePath.substr(start, slash == std::string::npos
                                                             ? std::string::npos
                                                             : slash - start);
        if (slash == std::string::npos) return test_file_name(segment);
        if (segment == "test" || segment == "tests" || segment == "__tests__" || segment == "spec")
            return true;
        start = slash + 1;
    }
}

}  // namespace

PackageUnit strip_tests(const PackageUnit& pkg) {
    PackageUnit out = pkg;
    out.files.clear();
    for (const SourceUnit& f : pkg.files)
        if (!test_path(f.relativePath)) out.files.push_back(f);
    return out;
}

size_t count_lines(const std::string& text) {
    size_t lines = std::count(text.begin(), text.end(), '\n');
    if (!text.empty() && text.back() != '\n') ++lines;
    return lines;
}

size_t total_lines(const PackageUnit& pkg) {
    size_t total = 0;
    for (const SourceUnit& f : pkg.files) total += count_lines(f.text);
    return total;
}

Admission admit_package(const PackageUnit& pkg, size_t maxLines) {
    if (pkg.files.empty()) return {false, "no source files"};
    size_t lines = total_lines(pkg);
    if (lines > maxLines)
        return {false, std::to_string(lines) + " lines exceeds limit of " + std::to_string(maxLines)};
    return {true, ""};
}

std::string scan_record(const PackageUnit& pkg, const Admission& admission) {
    nlohmann::ordered_json record;
    record["name"] = pkg.name;
    record["category"] = to_string(pkg.category);
    record["files"] = pkg.files.size();
    record["lines"] = total_lines(pkg);
    record["admitted"] = admission.admitted;
    record["reason"] = admission.reason;
    return record.dump();
}

}  // namespace tsweave
