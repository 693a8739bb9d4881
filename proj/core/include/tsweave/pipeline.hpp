#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "tsweave/fim.hpp"
#include "tsweave/metrics.hpp"
#include "tsweave/predictions.hpp"

namespace tsweave {

enum class Stage { Convert, PredictFim, Weave, Check, Report };

const char* to_string(Stage s);
std::optional<Stage> parse_stage(const std::string& name);

class PipelineConfigError : public std::runtime_error {
  public:
    explicit PipelineConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PipelineConfig {
    // Directory of package directories; every direct subdirectory is one
    // package.
    std::filesystem::path inputDir;
    // Stage artifacts persist here: converted/, predictions/, woven/,
    // checked/, report/, each holding one subtree per package plus a .jsonl
    // log next to it.
    std::filesystem::path workDir;
    // Empty means convert, weave, check, report (predict-fim replaces weave
    // when an endpoint or client is configured). Weave and predict-fim are
    // alternatives and cannot both be selected.
    std::set<Stage> stages;
    PredictionFormat predictionFormat = PredictionFormat::LocationKeyed;
    // External prediction tables, laid out <package>/<source path>.csv. They
    // are copied under workDir/predictions before weaving, so a later run can
    // weave from the work directory alone.
    std::filesystem::path predictionsDir;
    // Empty means $TSWEAVE_TSC if set, otherwise tsc from PATH.
    std::filesystem::path compilerPath;
    std::optional<std::string> endpointUrl;
    // Overrides endpointUrl when set; lets tests plug in a scripted stub.
    FimClient fimClient;
    FimConfig fim;
    size_t concurrency = 1;
    std::chrono::seconds checkTimeout{120};
    size_t maxLines = 10000;
};

// Runs the selected stages over every package under inputDir and returns the
// aggregated report. Per-package errors (inadmissible input, malformed
// predictions, an unreachable completion endpoint) are recorded in that
// package's entry; they never abort the rest of the corpus. Only a broken
// configuration throws.
//
// Stages compose through the work directory: a stage that is not selected
// reads whatever an earlier run left behind (woven trees for check, persisted
// check records for report), and a stage that is selected rebuilds its
// artifacts from scratch, so reruns are byte-identical.
MigrationReport run_pipeline(const PipelineConfig& config);

}  // namespace tsweave
