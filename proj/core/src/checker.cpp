#include "tsweave/checker.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tsweave/project.hpp"
#include "tsweave/subprocess.hpp"

namespace tsweave {

namespace fs = std::filesystem;

std::vector<std::string> default_compile_flags() {
    return {"--noEmit", "--esModuleInterop", "--moduleResolution node", "--target es6",
            "--lib es2021,dom"};
}

namespace {

void split_into(const std::string& flag, std::vector<std::string>& argv) {
    size_t start = 0;
    while (start < flag.size()) {
        size_t space = flag.find(' ', start);
        if (space == std::string::npos) space = flag.size();
        if (space > start) argv.push_back(flag.substr(start, space - start));
        start = space + 1;
    }
}

bool is_declaration_file(const std::string& name) {
    return name.ends_with(".d.ts") || name.ends_with(".d.mts");
}

std::vector<std::string> collect_inputs(const fs::path& pkgDir) {
    std::vector<std::string> files;
    fs::recursive_directory_iterator it(pkgDir), end;
    for (; it != end; ++it) {
        const fs::path& p = it->path();
        std::string name = p.filename().string();
        if (it->is_directory() && (name == "node_modules" || name.starts_with("."))) {
            it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        if (!name.ends_with(".ts") && !name.ends_with(".mts")) continue;
        if (is_declaration_file(name)) continue;
        files.push_back(fs::relative(p, pkgDir).generic_string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::vector<Diagnostic> parse_diagnostics(const std::string& output,
                                          std::vector<std::string>* unmatched) {
    static const std::regex kFileLine(R"(^(.+)\((\d+),(\d+)\): error (TS\d{4,5}): (.*)$)");
    static const std::regex kGlobalLine(R"(^error (TS\d{4,5}): (.*)$)");

    std::vector<Diagnostic> diagnostics;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (std::regex_match(line, m, kFileLine)) {
            Diagnostic d;
            d.file = m[1];
            d.line = std::stoul(m[2]);
            d.column = std::stoul(m[3]);
            d.code = m[4];
            d.message = m[5];
            diagnostics.push_back(std::move(d));
        } else if (std::regex_match(line, m, kGlobalLine)) {
            Diagnostic d;
            d.code = m[1];
            d.message = m[2];
            diagnostics.push_back(std::move(d));
        } else if (!diagnostics.empty() && !line.empty() &&
                   (line.front() == ' ' || line.front() == '\t')) {
            diagnostics.back().message += "\n" + line;
        } else if (unmatched && !line.empty()) {
            unmatched->push_back(line);
        }
    }
    return diagnostics;
}

fs::path resolve_compiler(const CompileConfig& config) {
    if (!config.compilerPath.empty()) return config.compilerPath;
    if (const char* env = std::getenv("TSWEAVE_TSC"); env && *env) return env;
    return "tsc";
}

std::string compiler_version(const CompileConfig& config) {
    ProcessResult proc;
    try {
        proc = run_process({resolve_compiler(config).string(), "--version"}, {},
                           config.timeout);
    } catch (const SpawnError& e) {
        throw CompilerNotFound(e.what());
    }
    std::string version = proc.output;
    while (!version.empty() && (version.back() == '\n' || version.back() == '\r'))
        version.pop_back();
    return version;
}

namespace {

CheckResult run_compiler(const fs::path& pkgDir, const CompileConfig& config,
                         bool emitDeclarations) {
    auto inputs = collect_inputs(pkgDir);
    if (inputs.empty())
        throw NotAPackage("no TypeScript sources under " + pkgDir.string());

    CheckResult result;
    result.package = fs::absolute(pkgDir).lexically_normal().filename().string();
    if (result.package.empty()) result.package = pkgDir.string();
    result.filesChecked = inputs.size();
    result.compilerVersion = compiler_version(config);

    std::vector<std::string> argv;
    argv.push_back(resolve_compiler(config).string());
    for (const auto& flag : config.flags) {
        if (emitDeclarations && flag == "--noEmit") continue;
        split_into(flag, argv);
    }
    if (emitDeclarations) {
        argv.insert(argv.end(), {"--declaration", "--emitDeclarationOnly", "--rootDir", ".",
                                 "--outDir", ".declarations"});
    }
    argv.insert(argv.end(), {"--pretty", "false"});
    argv.insert(argv.end(), inputs.begin(), inputs.end());

    ProcessResult proc;
    try {
        proc = run_process(argv, pkgDir, config.timeout);
    } catch (const SpawnError& e) {
        throw CompilerNotFound(e.what());
    }

    result.timedOut = proc.timedOut;
    result.diagnostics = parse_diagnostics(proc.output, &result.rawLog);
    auto fromStdErr = parse_diagnostics(proc.error, &result.rawLog);
    result.diagnostics.insert(result.diagnostics.end(), fromStdErr.begin(), fromStdErr.end());

    std::set<std::string> inputSet(inputs.begin(), inputs.end());
    std::set<std::string> errored;
    for (const auto& d : result.diagnostics)
        if (inputSet.count(d.file)) errored.insert(d.file);
    result.errorFreeFiles = inputs.size() - errored.size();
    result.typeChecks = result.diagnostics.empty() && !result.timedOut;
    if (emitDeclarations) result.declarationsDir = pkgDir / ".declarations";
    return result;
}

}  // namespace

CheckResult type_check(const fs::path& pkgDir, const CompileConfig& config) {
    return run_compiler(pkgDir, config, false);
}

CheckResult emit_declarations(const fs::path& pkgDir, const CompileConfig& config) {
    return run_compiler(pkgDir, config, true);
}

std::string check_record(const CheckResult& result) {
    nlohmann::ordered_json record;
    record["package"] = result.package;
    record["typeChecks"] = result.typeChecks;
    record["filesChecked"] = result.filesChecked;
    record["errorFreeFiles"] = result.errorFreeFiles;
    record["timedOut"] = result.timedOut;
    record["compilerVersion"] = result.compilerVersion;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& d : result.diagnostics) {
        nlohmann::ordered_json item;
        item["file"] = d.file;
        item["line"] = d.line;
        item["column"] = d.column;
        item["code"] = d.code;
        item["message"] = d.message;
        list.push_back(std::move(item));
    }
    record["diagnostics"] = std::move(list);
    return record.dump();
}

}  // namespace tsweave
