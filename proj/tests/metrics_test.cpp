#include "tsweave/metrics.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"
#include "tsweave/parser.hpp"

using namespace tsweave;

namespace {

SourceUnit unit_of(std::string text, std::string path) {
    SourceUnit u;
    u.relativePath = std::move(path);
    u.text = std::move(text);
    u.ast = js::parse_program(u.text);
    u.parsed = true;
    return u;
}

const SignatureRecord* find_signature(const std::vector<SignatureRecord>& sigs,
                                      const std::string& name) {
    for (const auto& s : sigs)
        if (s.functionName == name) return &s;
    return nullptr;
}

// Straight-line reimplementation of the comparison rules, used as an oracle:
// first overload per name, positional pairs over the common prefix, return
// pair when the ground truth declares one, `any` ground truth skipped.
AccuracyCount brute_force_compare(const std::vector<SignatureRecord>& gt,
                                  const std::vector<SignatureRecord>& gen) {
    AccuracyCount acc;
    std::map<std::string, SignatureRecord> gtFirst, genFirst;
    for (const auto& s : gt) gtFirst.emplace(s.functionName, s);
    for (const auto& s : gen) genFirst.emplace(s.functionName, s);

    for (const auto& [name, g] : gtFirst)
        if (!genFirst.count(name)) ++acc.skippedAbsent;
    for (const auto& [name, g] : genFirst)
        if (!gtFirst.count(name)) ++acc.skippedAbsent;

    for (const auto& [name, g] : gtFirst) {
        if (!genFirst.count(name)) continue;
        const SignatureRecord& h = genFirst.at(name);
        if (g.paramTypes.size() != h.paramTypes.size()) ++acc.arityMismatches;
        std::vector<std::pair<std::string, std::optional<std::string>>> pairs;
        for (size_t k = 0; k < std::min(g.paramTypes.size(), h.paramTypes.size()); ++k)
            pairs.push_back({g.paramTypes[k].second, h.paramTypes[k].second});
        if (g.returnType) pairs.push_back({*g.returnType, h.returnType});
        for (const auto& [gtType, genType] : pairs) {
            if (gtType == "any")
                ++acc.skippedAnyGroundTruth;
            else {
                ++acc.compared;
                if (genType && *genType == gtType) ++acc.matched;
            }
        }
    }
    return acc;
}

bool same_counts(const AccuracyCount& a, const AccuracyCount& b) {
    return a.compared == b.compared && a.matched == b.matched &&
           a.skippedAnyGroundTruth == b.skippedAnyGroundTruth &&
           a.skippedAbsent == b.skippedAbsent && a.arityMismatches == b.arityMismatches;
}

}  // namespace

TEST_CASE("signatures are lifted from compiler-emitted declarations") {
    std::string decl =
        "export declare const write: (buffer: number[], value: number, offset: number) => void;\n"
        "export declare var f: (i: any) => any;\n"
        "declare function read(buffer: Uint8Array, offset: number): number;\n"
        "export default function main(): void;\n";
    auto sigs = extract_signatures(decl);
    REQUIRE(sigs.size() == 4);

    CHECK(sigs[0].functionName == "write");
    REQUIRE(sigs[0].paramTypes.size() == 3);
    CHECK(sigs[0].paramTypes[0] == std::pair<std::string, std::string>{"buffer", "number[]"});
    CHECK(sigs[0].paramTypes[1] == std::pair<std::string, std::string>{"value", "number"});
    CHECK(sigs[0].paramTypes[2] == std::pair<std::string, std::string>{"offset", "number"});
    CHECK(sigs[0].returnType == "void");

    CHECK(sigs[1].functionName == "f");
    REQUIRE(sigs[1].paramTypes.size() == 1);
    CHECK(sigs[1].paramTypes[0].second == "any");
    CHECK(sigs[1].returnType == "any");

    CHECK(sigs[2].functionName == "read");
    CHECK(sigs[2].paramTypes.size() == 2);
    CHECK(sigs[2].returnType == "number");

    CHECK(sigs[3].functionName == "main");
    CHECK(sigs[3].paramTypes.empty());
    CHECK(extract_signatures("export default function(): void;")[0].functionName == "default");
}

TEST_CASE("handwritten declarations only yield top-level functions") {
    std::string decl =
        "export function read(buffer: Uint8Array, offset: number, isLE: boolean, mLen: number, "
        "nBytes: number): number;\n"
        "declare namespace foo {\n"
        "  function hidden(x: string): void;\n"
        "}\n"
        "interface Opts { cb: () => void; }\n"
        "type Alias = string;\n"
        "declare class C { m(x: number): void; }\n"
        "declare const VERSION: string;\n"
        "export = foo;\n";
    auto sigs = extract_signatures(decl);
    REQUIRE(sigs.size() == 1);
    CHECK(sigs[0].functionName == "read");
    CHECK(sigs[0].paramTypes.size() == 5);
    CHECK(sigs[0].paramTypes[2] ==
          std::pair<std::string, std::string>{"isLE", "boolean"});
    CHECK(sigs[0].returnType == "number");
}

TEST_CASE("modifiers and markers are dropped from extracted signatures") {
    auto sigs = extract_signatures(
        "declare function opt(x?: number): void;\n"
        "declare function rest(...args: string[]): void;\n"
        "declare function spaced(x:   number |    string): void;\n"
        "declare function id<T>(x: T): T;\n"
        "declare const pick: <T>(xs: T[]) => T;\n"
        "declare const handler: ((x: string) => void) | null;\n");
    REQUIRE(sigs.size() == 5);
    CHECK(sigs[0].paramTypes[0] == std::pair<std::string, std::string>{"x", "number"});
    CHECK(sigs[1].paramTypes[0] == std::pair<std::string, std::string>{"args", "string[]"});
    CHECK(sigs[2].paramTypes[0] ==
          std::pair<std::string, std::string>{"x", "number | string"});
    CHECK(sigs[3].functionName == "id");
    CHECK(sigs[3].paramTypes[0] == std::pair<std::string, std::string>{"x", "T"});
    CHECK(sigs[3].returnType == "T");
    CHECK(sigs[4].functionName == "pick");
    CHECK(sigs[4].paramTypes[0] == std::pair<std::string, std::string>{"xs", "T[]"});
    CHECK(find_signature(sigs, "handler") == nullptr);
}

TEST_CASE("overloads keep declaration order and garbage is tolerated") {
    auto sigs = extract_signatures(
        "declare function o(a: string): void;\n"
        "declare function o(a: number): void;\n");
    REQUIRE(sigs.size() == 2);
    CHECK(sigs[0].paramTypes[0].second == "string");
    CHECK(sigs[1].paramTypes[0].second == "number");

    CHECK(extract_signatures("").empty());
    CHECK(extract_signatures("'unterminated").empty());
    CHECK(extract_signatures("garbage ;; tokens ( [ {").empty());
}

TEST_CASE("signature comparison follows the exact-match rules") {
    std::vector<SignatureRecord> gt = {
        {"good", {{"x", "string"}}, "void"},
        {"union", {{"u", "string | number"}}, "void"},
        {"anyParam", {{"x", "any"}, {"y", "number"}}, "void"},
        {"missing", {{"x", "string"}}, "void"},
    };
    std::vector<SignatureRecord> gen = {
        {"good", {{"x", "string"}}, "void"},
        {"union", {{"u", "number | string"}}, "void"},
        {"anyParam", {{"x", "string"}, {"y", "number"}}, "void"},
        {"extra", {}, "void"},
    };
    AccuracyCount acc = compare_signatures(gt, gen);

    // good: 2 pairs matched. union: return matched, param compared unmatched.
    // anyParam: x skipped, y and return matched.
    CHECK(acc.compared == 6);
    CHECK(acc.matched == 5);
    CHECK(acc.skippedAnyGroundTruth == 1);
    CHECK(acc.skippedAbsent == 2);
    CHECK(acc.arityMismatches == 0);
    CHECK(same_counts(acc, brute_force_compare(gt, gen)));
}

TEST_CASE("arity mismatches compare the common prefix and are tallied") {
    std::vector<SignatureRecord> gt = {
        {"f", {{"a", "string"}, {"b", "number"}, {"c", "boolean"}}, "void"}};
    std::vector<SignatureRecord> gen = {{"f", {{"a", "string"}, {"b", "string"}}, "void"}};
    AccuracyCount acc = compare_signatures(gt, gen);
    CHECK(acc.arityMismatches == 1);
    CHECK(acc.compared == 3);  // a, b, and the return type
    CHECK(acc.matched == 2);
    CHECK(same_counts(acc, brute_force_compare(gt, gen)));
}

TEST_CASE("a twenty-signature fixture matches the brute-force oracle") {
    std::string gtDecl =
        "declare function s01(a: string): void;\n"
        "declare function s02(a: number, b: number): number;\n"
        "declare function s03(a: any): void;\n"
        "declare function s04(a: string | number): void;\n"
        "declare function s05(a: boolean): any;\n"
        "declare function s06(a: string, b: string, c: string): void;\n"
        "declare function s07(): void;\n"
        "declare function s08(a: number[]): number[];\n"
        "declare function s09(a: Map<string, number>): void;\n"
        "declare function s10(a: string): string;\n"
        "declare function s11(cb: (x: number) => void): void;\n"
        "declare function s12(a: number): void;\n"
        "declare function s13(a: string): void;\n"
        "declare function s14(a: any, b: any): void;\n"
        "declare function s15(a: number): number;\n"
        "declare function s16(a: string): void;\n"
        "declare function s17(a: number, b: string): void;\n"
        "declare function s18(a: object): void;\n"
        "declare function s19(a: string): void;\n"
        "declare function s20(a: number): void;\n";
    std::string genDecl =
        "declare function s01(a: string): void;\n"
        "declare function s02(a: number, b: number): number;\n"
        "declare function s03(a: string): void;\n"
        "declare function s04(a: number | string): void;\n"
        "declare function s05(a: boolean): string;\n"
        "declare function s06(a: string, b: string): void;\n"
        "declare function s07(): void;\n"
        "declare function s08(a: number[]): number[];\n"
        "declare function s09(a: Map<string, number>): void;\n"
        "declare function s10(a: number): string;\n"
        "declare function s11(cb: (x: number) => void): void;\n"
        "declare function s12(a: number, b: number): void;\n"
        "declare function s14(a: number, b: string): void;\n"
        "declare function s15(a: any): any;\n"
        "declare function s16(a: string): void;\n"
        "declare function s17(b: string, a: number): void;\n"
        "declare function s18(a: Object): void;\n"
        "declare function s19(a: string): void;\n"
        "declare function s20(a: number): void;\n"
        "declare function s21(a: string): void;\n";
    auto gt = extract_signatures(gtDecl);
    auto gen = extract_signatures(genDecl);
    REQUIRE(gt.size() == 20);
    REQUIRE(gen.size() == 20);

    AccuracyCount acc = compare_signatures(gt, gen);
    AccuracyCount oracle = brute_force_compare(gt, gen);
    CHECK(same_counts(acc, oracle));
    CHECK(acc.matched <= acc.compared);
    CHECK(acc.compared == 37);
    CHECK(acc.matched == 30);
    CHECK(acc.skippedAbsent == 2);          // s13 missing, s21 extra
    CHECK(acc.skippedAnyGroundTruth == 4);  // s03's a, s14's a and b, s05's return
    CHECK(acc.arityMismatches == 2);        // s06 and s12

    // s04 union order and s18 object casing count as compared, not matched.
    std::vector<SignatureRecord> shuffled = gen;
    std::mt19937 rng(7);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(same_counts(compare_signatures(gt, shuffled), acc));
    }
}

TEST_CASE("annotations are tallied per file with triviality flags") {
    PackageUnit pkg;
    pkg.name = "demo";
    pkg.files.push_back(unit_of(
        "const a: any = 1;\nconst n: number = 2;\nconst f: Function = () => 1;\nconst l: any[] "
        "= [];\n",
        "a.ts"));

    CheckResult clean;
    auto tally = count_annotations(pkg, true, clean);
    CHECK(tally.total == 4);
    CHECK(tally.trivial == 3);
    CHECK(trivial_annotation_ratio(pkg, true, clean) == 0.75);
}

TEST_CASE("a package with no annotations reports an absent ratio") {
    PackageUnit pkg;
    pkg.files.push_back(unit_of("const x = 1;\n", "x.ts"));
    CheckResult clean;
    CHECK(trivial_annotation_ratio(pkg, true, clean) == std::nullopt);
}

TEST_CASE("the error-free restriction drops files the check blamed") {
    PackageUnit pkg;
    pkg.files.push_back(unit_of("const a: any = 1;\nconst b: number = 2;\n", "lib/a.ts"));
    pkg.files.push_back(unit_of("const c: any = 3;\n", "lib/b.ts"));

    CheckResult check;
    check.diagnostics.push_back({"lib/b.ts", 1, 7, "TS2322", "boom"});

    auto restricted = count_annotations(pkg, true, check);
    CHECK(restricted.total == 2);
    CHECK(restricted.trivial == 1);
    auto full = count_annotations(pkg, false, check);
    CHECK(full.total == 3);
    CHECK(full.trivial == 2);
    CHECK(trivial_annotation_ratio(pkg, true, check) == 0.5);
}

TEST_CASE("annotation texts are normalized and source-ordered") {
    auto unit = unit_of("function f(x:   number |\n    string): void { return; }\n", "f.ts");
    auto texts = annotation_texts(unit);
    REQUIRE(texts.size() == 2);
    CHECK(texts[0] == "number | string");
    CHECK(texts[1] == "void");

    CHECK(is_trivial_annotation("any"));
    CHECK(is_trivial_annotation("any []"));
    CHECK(is_trivial_annotation("Function"));
    CHECK_FALSE(is_trivial_annotation("anyhow"));
    CHECK_FALSE(is_trivial_annotation("number"));
}

TEST_CASE("error codes are counted across results") {
    CheckResult r1, r2;
    r1.diagnostics = {{"a.ts", 1, 1, "TS2339", ""}, {"b.ts", 2, 2, "TS2322", ""}};
    r2.diagnostics = {{"c.ts", 3, 3, "TS2339", ""}};
    auto histogram = error_code_histogram({r1, r2});
    CHECK(histogram == std::map<std::string, size_t>{{"TS2322", 1}, {"TS2339", 2}});
    CHECK(error_code_histogram({}).empty());
}

TEST_CASE("the top-ten view always carries an Other bucket") {
    std::map<std::string, size_t> histogram;
    for (int k = 0; k < 12; ++k)
        histogram["TS" + std::to_string(1000 + k)] = static_cast<size_t>(100 - k);
    auto rows = top_error_codes(histogram);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0].code == "TS1000");
    CHECK(rows[0].count == 100);
    CHECK(rows.back().code == "Other");
    CHECK(rows.back().count == 90 + 89);

    size_t total = 0;
    for (const auto& row : rows) total += row.count;
    size_t expected = 0;
    for (const auto& [code, count] : histogram) expected += count;
    CHECK(total == expected);

    auto small = top_error_codes({{"TS1", 3}, {"TS2", 3}});
    REQUIRE(small.size() == 3);
    CHECK(small[0].code == "TS1");  // ties break on code
    CHECK(small[1].code == "TS2");
    CHECK(small.back().count == 0);
}

TEST_CASE("the error ECDF steps through distinct counts up to one") {
    auto points = error_ecdf({0, 0, 5});
    REQUIRE(points.size() == 2);
    CHECK(points[0].errorCount == 0);
    CHECK(points[0].proportion == doctest::Approx(2.0 / 3.0));
    CHECK(points[1].errorCount == 5);
    CHECK(points[1].proportion == 1.0);

    auto single = error_ecdf({7});
    REQUIRE(single.size() == 1);
    CHECK(single[0].errorCount == 7);
    CHECK(single[0].proportion == 1.0);

    CHECK(error_ecdf({}).empty());
}

TEST_CASE("the ECDF matches a sort-and-rank oracle on a ten-package corpus") {
    std::vector<size_t> counts = {3, 0, 12, 7, 0, 3, 25, 3, 1, 12};
    auto points = error_ecdf(counts);

    std::vector<size_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& point : points) {
        size_t below = static_cast<size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), point.errorCount) - sorted.begin());
        CHECK(point.proportion == doctest::Approx(static_cast<double>(below) / sorted.size()));
    }
    for (size_t k = 1; k < points.size(); ++k) {
        CHECK(points[k].errorCount > points[k - 1].errorCount);
        CHECK(points[k].proportion >= points[k - 1].proportion);
    }
    CHECK(points.back().proportion == 1.0);
}

namespace {

PackageReport make_package(std::string name, PackageCategory category, bool migrated,
                           bool typeChecks, size_t files, size_t errorFree, size_t errors) {
    PackageReport p;
    p.name = std::move(name);
    p.category = category;
    p.migrated = migrated;
    p.typeChecks = typeChecks;
    p.totalFiles = files;
    p.errorFreeFiles = errorFree;
    p.errorCount = errors;
    return p;
}

}  // namespace

TEST_CASE("report rollups equal the per-package sums") {
    std::vector<PackageReport> packages;
    auto p1 = make_package("delta", PackageCategory::NeverTypedNoDeps, true, true, 3, 3, 0);
    p1.totalAnnotations = 10;
    p1.trivialAnnotations = 4;
    p1.errorCodeHistogram = {{"TS2339", 0}};
    auto p2 = make_package("alpha", PackageCategory::NeverTypedNoDeps, true, false, 4, 1, 9);
    p2.errorCodeHistogram = {{"TS2339", 6}, {"TS2322", 3}};
    p2.totalAnnotations = 2;
    p2.trivialAnnotations = 2;
    auto p3 = make_package("mid", PackageCategory::DefinitelyTypedNoDeps, true, false, 2, 0, 5);
    p3.errorCodeHistogram = {{"TS2304", 5}};
    p3.accuracy = AccuracyCount{4, 2, 1, 0, 0};
    auto p4 = make_package("broken", PackageCategory::DefinitelyTypedNoDeps, false, false, 0, 0, 0);
    p4.failure = "conversion failed";
    auto p5 = make_package("slow", PackageCategory::NeverTypedNoDeps, true, false, 1, 0, 0);
    p5.timedOut = true;
    packages = {p1, p2, p3, p4, p5};

    MigrationReport report = build_report(packages);

    REQUIRE(report.packages.size() == 5);
    CHECK(report.packages.front().name == "alpha");
    CHECK(report.packages.back().name == "slow");

    const auto& never = report.byCategory.at(PackageCategory::NeverTypedNoDeps);
    CHECK(never.packages == 3);
    CHECK(never.migrated == 3);
    CHECK(never.timedOut == 1);
    CHECK(never.typeChecking == 1);
    CHECK(never.totalFiles == 8);
    CHECK(never.errorFreeFiles == 4);
    CHECK(type_check_rate(never) == 0.5);
    CHECK(error_free_file_rate(never) == 0.5);
    CHECK(trivial_ratio(never) == 0.5);

    const auto& dt = report.byCategory.at(PackageCategory::DefinitelyTypedNoDeps);
    CHECK(dt.packages == 2);
    CHECK(dt.migrated == 1);
    CHECK(type_check_rate(dt) == 0.0);
    CHECK(accuracy_rate(dt) == 0.5);
    CHECK(accuracy_rate(never) == std::nullopt);

    CHECK(report.overall.packages == 5);
    CHECK(report.overall.errorCount == 14);
    CHECK(report.errorCodeHistogram ==
          std::map<std::string, size_t>{{"TS2304", 5}, {"TS2322", 3}, {"TS2339", 6}});

    // ECDF covers checked packages only: p1, p2, p3 (not the failed or the
    // timed-out one).
    REQUIRE(report.ecdf.size() == 3);
    CHECK(report.ecdf[0].errorCount == 0);
    CHECK(report.ecdf[0].proportion == doctest::Approx(1.0 / 3.0));
    CHECK(report.ecdf.back().errorCount == 9);
    CHECK(report.ecdf.back().proportion == 1.0);

    // Every rollup is recomputable from the per-package records.
    for (const auto& [category, rollup] : report.byCategory) {
        CategoryRollup sum;
        for (const auto& p : report.packages) {
            if (p.category != category) continue;
            ++sum.packages;
            sum.migrated += p.migrated ? 1 : 0;
            sum.timedOut += p.timedOut ? 1 : 0;
            sum.typeChecking += p.typeChecks ? 1 : 0;
            sum.totalFiles += p.totalFiles;
            sum.errorFreeFiles += p.errorFreeFiles;
            sum.errorCount += p.errorCount;
            sum.totalAnnotations += p.totalAnnotations;
            sum.trivialAnnotations += p.trivialAnnotations;
        }
        CHECK(sum.packages == rollup.packages);
        CHECK(sum.migrated == rollup.migrated);
        CHECK(sum.timedOut == rollup.timedOut);
        CHECK(sum.typeChecking == rollup.typeChecking);
        CHECK(sum.totalFiles == rollup.totalFiles);
        CHECK(sum.errorFreeFiles == rollup.errorFreeFiles);
        CHECK(sum.errorCount == rollup.errorCount);
        CHECK(sum.totalAnnotations == rollup.totalAnnotations);
        CHECK(sum.trivialAnnotations == rollup.trivialAnnotations);
    }
}

TEST_CASE("identical reports compare with zero deltas") {
    std::vector<PackageReport> packages = {
        make_package("a", PackageCategory::NeverTypedNoDeps, true, true, 2, 2, 0),
        make_package("b", PackageCategory::NeverTypedNoDeps, true, false, 2, 1, 3),
    };
    MigrationReport report = build_report(packages);
    auto cmp = before_after_compare(report, report);

    REQUIRE(cmp.rows.size() == 2);  // the category plus Overall
    for (const auto& row : cmp.rows) {
        CHECK(row.typeCheckBefore == row.typeCheckAfter);
        CHECK(row.errorFreeBefore == row.errorFreeAfter);
        CHECK(row.accuracyBefore == row.accuracyAfter);
    }
    CHECK(cmp.rows.back().category == "Overall");
    CHECK(cmp.typeChecksBoth == std::vector<std::string>{"a"});
    CHECK(cmp.typeChecksNeither == std::vector<std::string>{"b"});
    CHECK(cmp.typeChecksBeforeOnly.empty());
    CHECK(cmp.typeChecksAfterOnly.empty());
}

TEST_CASE("a package fixed by conversion lands in the after-only set") {
    MigrationReport before = build_report({
        make_package("fixed", PackageCategory::NeverTypedNoDeps, true, false, 1, 0, 2),
        make_package("steady", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0),
        make_package("regressed", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0),
    });
    MigrationReport after = build_report({
        make_package("fixed", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0),
        make_package("steady", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0),
        make_package("regressed", PackageCategory::NeverTypedNoDeps, true, false, 1, 0, 1),
    });
    auto cmp = before_after_compare(before, after);
    CHECK(cmp.typeChecksAfterOnly == std::vector<std::string>{"fixed"});
    CHECK(cmp.typeChecksBeforeOnly == std::vector<std::string>{"regressed"});
    CHECK(cmp.typeChecksBoth == std::vector<std::string>{"steady"});
    CHECK(cmp.typeChecksNeither.empty());
}

TEST_CASE("mismatched package sets are rejected") {
    MigrationReport before =
        build_report({make_package("a", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0)});
    MigrationReport after =
        build_report({make_package("b", PackageCategory::NeverTypedNoDeps, true, true, 1, 1, 0)});
    CHECK_THROWS_AS((void)before_after_compare(before, after), PackageSetMismatch);
}
