#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsweave/ast.hpp"
#include "tsweave/predictions.hpp"
#include "tsweave/project.hpp"

namespace tsweave {

enum class SiteKind { VariableDeclaration, FunctionParameter, FunctionResult };

const char* to_string(SiteKind k);

// A slot where a `: T` annotation may be inserted. Sites are reported in
// source order of `span`. Excluded up front: already-annotated slots,
// declarators of multi-variable statements, for-in/for-of heads, optional
// and defaulted and destructured parameters, rest parameters, class fields,
// constructor and setter results, and the parameters and results of
// paren-less arrows (neither slot has a legal insertion point).
struct AnnotationSite {
    SiteKind kind = SiteKind::VariableDeclaration;
    std::optional<std::string> identifier;  // absent for anonymous results
    js::Span span;                          // identifier token, or the result slot
                                            // (name token of named functions, `=>`
                                            // of arrows, `function` of anonymous
                                            // expressions)
    std::vector<std::string> declarationTokens;  // header token texts
    int identifierRow = -1;  // index into declarationTokens whose prediction
                             // row carries the type; -1 when identifier absent
    int insertAfterToken = -1;  // `: T` goes right after this token
    js::NodeId node = js::kNoNode;
};

std::vector<AnnotationSite> collect_sites(const js::Ast& ast);

// Phase-1 output: which site gets which (already normalized, grammar-checked)
// type text. Indices refer to the site list the plan was built from.
struct WeavePlan {
    struct Assignment {
        size_t site;
        std::string type;
    };
    std::vector<Assignment> assignments;
    std::vector<size_t> unmatchedSites;  // no prediction, no usable candidate
    size_t invalidTypes = 0;             // candidates rejected by the type grammar
    size_t unusedPredictions = 0;
};

// Phase 1 for the location-keyed format: every site's span is looked up in
// the table; nothing is mutated, so all queries see original coordinates.
WeavePlan plan_location_weave(const std::vector<AnnotationSite>& sites,
                              const LocationPredictionTable& table);

// Phase 1 for the token-aligned format: a cursor moves monotonically through
// table.rows; each identified site searches forward from the cursor for the
// first contiguous row window matching its declarationTokens, consumes the
// window, and takes the top-1 candidate of the identifier's row. Sites with
// no window leave the cursor alone so later declarations can still match.
WeavePlan plan_token_weave(const std::vector<AnnotationSite>& sites,
                           const TokenPredictionTable& table);

// Phase 2: inserts `: T` after each assigned site's insertion token.
std::string apply_plan(const js::Ast& ast, const std::vector<AnnotationSite>& sites,
                       const WeavePlan& plan);

struct WeaveStats {
    size_t sitesFound = 0;
    size_t sitesAnnotated = 0;
    size_t unmatched = 0;  // sitesFound - sitesAnnotated
    bool reverted = false;
};

struct WeaveOutcome {
    std::string text;
    WeaveStats stats;
};

// Phase 2 with the safety net: applies the plan, then re-parses the result.
// If the woven text fails to parse (possible when the plan was built outside
// the validating planners) the original text is returned with stats.reverted
// set and nothing annotated.
WeaveOutcome weave_with_plan(const SourceUnit& unit, const std::vector<AnnotationSite>& sites,
                             const WeavePlan& plan);

// Full weave of one parsed file: collect, plan, apply, re-parse. If the
// woven text fails to parse the original text is returned with
// stats.reverted set and nothing annotated.
WeaveOutcome weave_location_keyed(const SourceUnit& unit, const LocationPredictionTable& table);
WeaveOutcome weave_token_aligned(const SourceUnit& unit, const TokenPredictionTable& table);

// Per-file prediction tables for one package, keyed by source-relative path.
struct PredictionSet {
    PredictionFormat format = PredictionFormat::LocationKeyed;
    std::map<std::string, TokenPredictionTable> token;
    std::map<std::string, LocationPredictionTable> location;
};

struct FileWeaveRecord {
    std::string file;  // output-relative path
    WeaveStats stats;
};

struct WeavePackageResult {
    std::filesystem::path outDir;
    std::vector<FileWeaveRecord> log;
};

// Output name for a woven source file: .js to .ts, .mjs to .mts, anything
// else unchanged.
std::string woven_name(const std::string& relativePath);

// Weaves a whole package into outDir. Files without a table (and files that
// never parsed) are copied with only the extension change. node_modules and
// package.json are copied verbatim so the compiler can resolve dependency
// declarations; the package's own root .d.ts files are ground truth and stay
// out of the output.
WeavePackageResult weave_package(const PackageUnit& pkg, const PredictionSet& predictions,
                                 const std::filesystem::path& outDir);

// One weave-log line: {"file", "sitesFound", "sitesAnnotated", "unmatched",
// "reverted"}.
std::string weave_record(const FileWeaveRecord& record);

// Removes every type annotation recorded in the tree; used to check the
// erasure round-trip (weaving then stripping restores the input tokens).
std::string strip_annotations(const js::Ast& ast);

}  // namespace tsweave
