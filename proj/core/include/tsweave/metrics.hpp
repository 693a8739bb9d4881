#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsweave/checker.hpp"
#include "tsweave/project.hpp"

namespace tsweave {

// One function signature lifted from a declaration file. Type texts are kept
// verbatim apart from collapsing whitespace runs to single spaces; matching
// is exact string comparison, so `string | number` and `number | string`
// stay different.
struct SignatureRecord {
    std::string functionName;
    std::vector<std::pair<std::string, std::string>> paramTypes;  // (name, type)
    std::optional<std::string> returnType;
};

// Top-level `declare function` statements and function-typed
// `declare const/var/let` bindings. Bodies of namespaces, modules, classes,
// and interfaces are skipped; overloads keep their declaration order.
std::vector<SignatureRecord> extract_signatures(const std::string& declarationText);

struct AccuracyCount {
    size_t compared = 0;
    size_t matched = 0;
    size_t skippedAnyGroundTruth = 0;
    size_t skippedAbsent = 0;     // signatures present on only one side
    size_t arityMismatches = 0;   // signatures compared over a common prefix

    AccuracyCount& operator+=(const AccuracyCount& other);
};

// Pairs signatures by function name (first overload on each side), compares
// parameter types positionally and the return type, and requires byte-equal
// type text. Pairs whose ground truth is `any` are skipped.
AccuracyCount compare_signatures(const std::vector<SignatureRecord>& groundTruth,
                                 const std::vector<SignatureRecord>& generated);

// Every annotation in the file, in source order, whitespace-normalized.
std::vector<std::string> annotation_texts(const SourceUnit& unit);

bool is_trivial_annotation(const std::string& type);

struct AnnotationTally {
    size_t total = 0;
    size_t trivial = 0;  // any, any[], or Function
};

// Counts annotations of the woven package, optionally restricted to files
// the check attributed no errors to.
AnnotationTally count_annotations(const PackageUnit& wovenPkg, bool errorFreeOnly,
                                  const CheckResult& check);

// trivial / total; absent when the package has no annotations in scope.
std::optional<double> trivial_annotation_ratio(const PackageUnit& wovenPkg, bool errorFreeOnly,
                                               const CheckResult& check);

// code -> count over every diagnostic of every result.
std::map<std::string, size_t> error_code_histogram(const std::vector<CheckResult>& results);

struct HistogramRow {
    std::string code;  // "Other" for the aggregate bucket
    size_t count = 0;
};

// The `top` most frequent codes (ties broken by code) plus an Other bucket;
// row counts always sum to the histogram total.
std::vector<HistogramRow> top_error_codes(const std::map<std::string, size_t>& histogram,
                                          size_t top = 10);

struct EcdfPoint {
    size_t errorCount = 0;
    double proportion = 0.0;  // of packages with at most errorCount errors
};

// Empirical CDF of per-package error counts: one point per distinct count,
// non-decreasing, ending at 1.
std::vector<EcdfPoint> error_ecdf(const std::vector<size_t>& errorCounts);

struct PackageReport {
    std::string name;
    PackageCategory category = PackageCategory::NeverTypedNoDeps;
    // The package produced a checkable TypeScript tree. Packages that failed
    // earlier stages carry `failure` and stay out of rate denominators.
    bool migrated = false;
    std::string failure;
    bool timedOut = false;
    bool typeChecks = false;
    size_t totalFiles = 0;
    size_t errorFreeFiles = 0;
    size_t errorCount = 0;
    std::map<std::string, size_t> errorCodeHistogram;
    size_t totalAnnotations = 0;    // within error-free files
    size_t trivialAnnotations = 0;  // within error-free files
    std::optional<AccuracyCount> accuracy;  // only with declaration ground truth
};

struct CategoryRollup {
    size_t packages = 0;
    size_t migrated = 0;
    size_t timedOut = 0;
    size_t typeChecking = 0;
    size_t totalFiles = 0;
    size_t errorFreeFiles = 0;
    size_t errorCount = 0;
    size_t totalAnnotations = 0;
    size_t trivialAnnotations = 0;
    AccuracyCount accuracy;
};

// typeChecking over packages that migrated and did not time out.
std::optional<double> type_check_rate(const CategoryRollup& rollup);
std::optional<double> error_free_file_rate(const CategoryRollup& rollup);
std::optional<double> trivial_ratio(const CategoryRollup& rollup);
std::optional<double> accuracy_rate(const CategoryRollup& rollup);

struct MigrationReport {
    std::vector<PackageReport> packages;  // sorted by name
    std::map<PackageCategory, CategoryRollup> byCategory;
    CategoryRollup overall;
    std::map<std::string, size_t> errorCodeHistogram;
    std::vector<EcdfPoint> ecdf;  // over migrated, non-timed-out packages
};

// Aggregates per-package records; every rollup is recomputable from
// `packages` alone.
MigrationReport build_report(std::vector<PackageReport> packages);

class PackageSetMismatch : public std::runtime_error {
  public:
    explicit PackageSetMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct BeforeAfterRow {
    std::string category;  // category name, or "Overall"
    std::optional<double> typeCheckBefore, typeCheckAfter;
    std::optional<double> errorFreeBefore, errorFreeAfter;
    std::optional<double> accuracyBefore, accuracyAfter;
};

struct BeforeAfterComparison {
    std::vector<BeforeAfterRow> rows;  // categories present in either report, then Overall
    // Four-way split of packages by where they type check; sorted names.
    std::vector<std::string> typeChecksBoth;
    std::vector<std::string> typeChecksBeforeOnly;
    std::vector<std::string> typeChecksAfterOnly;
    std::vector<std::string> typeChecksNeither;
};

// Both reports must cover the same package names; packages failing in either
// run simply land in the `neither` bucket.
BeforeAfterComparison before_after_compare(const MigrationReport& before,
                                           const MigrationReport& after);

}  // namespace tsweave
