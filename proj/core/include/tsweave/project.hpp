#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsweave/ast.hpp"

namespace tsweave {

struct NotAPackage : std::runtime_error {
    explicit NotAPackage(const std::string& dir)
        : std::runtime_error("not a package: " + dir + " (no manifest and no source files)") {}
};

// One source file of a package, parsed up front. Unparseable files keep
// their text (they are still copied through the pipeline so the compiler
// can judge them) but carry parsed=false and the parse error message.
struct SourceUnit {
    std::string relativePath;  // forward-slash separated, relative to the package root
    std::string text;
    js::Ast ast;
    bool parsed = false;
    std::string parseError;
};

enum class PackageCategory {
    DefinitelyTypedNoDeps,
    DefinitelyTypedWithDeps,
    NeverTypedNoDeps,
    NeverTypedWithDeps,
};

enum class ModuleSystem { CommonJs, Esm, Mixed };

struct PackageUnit {
    std::string name;
    std::filesystem::path rootDir;
    std::vector<SourceUnit> files;
    bool hasDeclarations = false;
    bool hasDependencies = false;
    PackageCategory category = PackageCategory::NeverTypedNoDeps;
    ModuleSystem moduleSystem = ModuleSystem::CommonJs;
};

const char* to_string(PackageCategory c);
const char* to_string(ModuleSystem m);

// Pure 2x2 map from (declaration ground truth available, has runtime deps).
PackageCategory categorize(bool hasDeclarations, bool hasDependencies);

// Reads the package at rootDir: package.json for name and runtime
// dependencies, every .js/.mjs/.ts/.mts outside node_modules and
// dot-directories as a SourceUnit (so woven output directories can be
// rescanned). A .jsx file is recorded as unparseable rather than skipped.
// hasDeclarations is declarationsAvailable OR any *.d.ts shipped in the tree.
// moduleSystem is detected from the parsed files: require/module.exports
// usage marks a file CommonJS, import/export declarations mark it ESM; a
// package with both kinds is Mixed, with neither CommonJs.
// Throws NotAPackage when there is neither a manifest nor a source file.
// Never writes to disk.
PackageUnit scan_package(const std::filesystem::path& rootDir, bool declarationsAvailable);

// Drops test directories (path segments test, tests, __tests__, spec) and
// test-named files (test.js, tests.js, test-*.js, *-test.js, *.test.js,
// *.spec.js). Purely in-memory; idempotent.
PackageUnit strip_tests(const PackageUnit& pkg);

// Physical line count of one text: newline count, plus one when the last
// line is unterminated.
size_t count_lines(const std::string& text);

// Sum of count_lines over all files.
size_t total_lines(const PackageUnit& pkg);

struct Admission {
    bool admitted = false;
    std::string reason;  // empty when admitted
};

// Admits a (test-stripped) package iff it has at least one source file and
// at most maxLines physical lines.
Admission admit_package(const PackageUnit& pkg, size_t maxLines = 10000);

// One line-delimited JSON record {name, category, files, lines, admitted,
// reason} for the scan manifest.
std::string scan_record(const PackageUnit& pkg, const Admission& admission);

}  // namespace tsweave
