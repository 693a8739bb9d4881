#include "tsweave/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "json.hpp"

#include "tsweave/checker.hpp"
#include "tsweave/convert.hpp"
#include "tsweave/project.hpp"
#include "tsweave/report.hpp"
#include "tsweave/weave.hpp"

namespace tsweave {

namespace fs = std::filesystem;

const char* to_string(Stage s) {
    switch (s) {
        case Stage::Convert: return "convert";
        case Stage::PredictFim: return "predict-fim";
        case Stage::Weave: return "weave";
        case Stage::Check: return "check";
        case Stage::Report: return "report";
    }
    return "?";
}

std::optional<Stage> parse_stage(const std::string& name) {
    if (name == "convert") return Stage::Convert;
    if (name == "predict-fim") return Stage::PredictFim;
    if (name == "weave") return Stage::Weave;
    if (name == "check") return Stage::Check;
    if (name == "report") return Stage::Report;
    return std::nullopt;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

PredictionSet load_predictions(const fs::path& dir, PredictionFormat format) {
    PredictionSet set;
    set.format = format;
    if (!fs::exists(dir)) return set;
    std::vector<fs::path> tables;
    for (fs::recursive_directory_iterator it(dir), end; it != end; ++it)
        if (it->is_regular_file() && it->path().extension() == ".csv")
            tables.push_back(it->path());
    std::sort(tables.begin(), tables.end());
    for (const fs::path& table : tables) {
        std::string rel = fs::relative(table, dir).generic_string();
        std::string key = rel.substr(0, rel.size() - 4);
        if (format == PredictionFormat::TokenAligned)
            set.token[key] = load_token_predictions(table.string());
        else
            set.location[key] = load_location_predictions(table.string());
    }
    return set;
}

size_t parameter_site_count(const js::Ast& ast) {
    size_t n = 0;
    for (const AnnotationSite& site : collect_sites(ast))
        if (site.kind == SiteKind::FunctionParameter) ++n;
    return n;
}

struct FimWeaveOutcome {
    std::string log;  // one JSON line per file
    bool endpointDown = false;
};

// FIM counterpart of weave_package: annotates each parsed file through the
// completion client and writes the tree with the same renames and manifest
// copies. After the endpoint dies the remaining files are written
// unannotated, so the tree stays complete.
FimWeaveOutcome fim_weave_package(const PackageUnit& pkg, const FimClient& client,
                                  const FimConfig& config, const fs::path& outDir) {
    fs::create_directories(outDir);
    FimWeaveOutcome outcome;
    std::ostringstream log;
    for (const SourceUnit& unit : pkg.files) {
        std::string outName = woven_name(unit.relativePath);
        std::string text = unit.text;
        WeaveStats stats;
        size_t requests = 0;
        bool aborted = false;
        if (unit.parsed && !outcome.endpointDown) {
            FimFileResult r = annotate_parameters_via_fim(unit, client, config);
            text = r.unit.text;
            stats = r.stats;
            requests = r.requests;
            aborted = r.aborted;
            if (aborted) outcome.endpointDown = true;
        } else if (unit.parsed) {
            stats.sitesFound = parameter_site_count(unit.ast);
            stats.unmatched = stats.sitesFound;
            aborted = true;
        }
        nlohmann::ordered_json j;
        j["file"] = outName;
        j["sitesFound"] = stats.sitesFound;
        j["sitesAnnotated"] = stats.sitesAnnotated;
        j["unmatched"] = stats.unmatched;
        j["requests"] = requests;
        j["aborted"] = aborted;
        log << j.dump() << '\n';
        write_file(outDir / outName, text);
    }
    if (fs::exists(pkg.rootDir / "package.json"))
        fs::copy_file(pkg.rootDir / "package.json", outDir / "package.json",
                      fs::copy_options::overwrite_existing);
    if (fs::exists(pkg.rootDir / "node_modules"))
        fs::copy(pkg.rootDir / "node_modules", outDir / "node_modules",
                 fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    outcome.log = log.str();
    return outcome;
}

std::optional<CheckResult> load_check_record(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    auto j = nlohmann::json::parse(read_file(p));
    CheckResult r;
    r.package = j.value("package", std::string());
    r.typeChecks = j.value("typeChecks", false);
    r.filesChecked = j.value("filesChecked", size_t{0});
    r.errorFreeFiles = j.value("errorFreeFiles", size_t{0});
    r.timedOut = j.value("timedOut", false);
    r.compilerVersion = j.value("compilerVersion", std::string());
    for (const auto& item : j.value("diagnostics", nlohmann::json::array())) {
        Diagnostic d;
        d.file = item.value("file", std::string());
        d.line = item.value("line", size_t{0});
        d.column = item.value("column", size_t{0});
        d.code = item.value("code", std::string());
        d.message = item.value("message", std::string());
        r.diagnostics.push_back(std::move(d));
    }
    return r;
}

std::optional<AccuracyCount> load_accuracy_record(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    auto j = nlohmann::json::parse(read_file(p));
    AccuracyCount a;
    a.compared = j.value("compared", size_t{0});
    a.matched = j.value("matched", size_t{0});
    a.skippedAnyGroundTruth = j.value("skippedAnyGroundTruth", size_t{0});
    a.skippedAbsent = j.value("skippedAbsent", size_t{0});
    a.arityMismatches = j.value("arityMismatches", size_t{0});
    return a;
}

std::string accuracy_record(const AccuracyCount& a) {
    nlohmann::ordered_json j;
    j["compared"] = a.compared;
    j["matched"] = a.matched;
    j["skippedAnyGroundTruth"] = a.skippedAnyGroundTruth;
    j["skippedAbsent"] = a.skippedAbsent;
    j["arityMismatches"] = a.arityMismatches;
    return j.dump() + "\n";
}

// Declaration files of one tree, node_modules and dot directories excluded,
// in path order.
std::vector<fs::path> declaration_files(const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::exists(root)) return out;
    for (fs::recursive_directory_iterator it(root), end; it != end; ++it) {
        std::string name = it->path().filename().string();
        if (it->is_directory()) {
            if (name == "node_modules" || name.starts_with('.')) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        if (name.ends_with(".d.ts") || name.ends_with(".d.mts")) out.push_back(it->path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SignatureRecord> signatures_from(const std::vector<fs::path>& files) {
    std::vector<SignatureRecord> all;
    for (const fs::path& f : files) {
        std::vector<SignatureRecord> sigs = extract_signatures(read_file(f));
        all.insert(all.end(), sigs.begin(), sigs.end());
    }
    return all;
}

struct Runner {
    const PipelineConfig& cfg;
    std::set<Stage> stages;
    FimClient client;

    PackageReport process(const std::string& dirName) const {
        PackageReport rep;
        rep.name = dirName;
        try {
            fill(rep, dirName);
        } catch (const std::exception& e) {
            rep.migrated = false;
            rep.failure = e.what();
        }
        return rep;
    }

    void fill(PackageReport& rep, const std::string& dirName) const {
        fs::path inputRoot = cfg.inputDir / dirName;
        PackageUnit input = scan_package(inputRoot, false);
        rep.name = input.name;
        rep.category = input.category;

        PackageUnit work = strip_tests(input);
        Admission admission = admit_package(work, cfg.maxLines);
        if (!admission.admitted) {
            rep.failure = "not admitted: " + admission.reason;
            return;
        }

        fs::path convertedDir = cfg.workDir / "converted" / dirName;
        if (stages.count(Stage::Convert)) {
            fs::remove_all(convertedDir);
            ConvertPackageResult conv = convert_package(work, convertedDir);
            std::ostringstream log;
            for (const ConversionOutcome& o : conv.outcomes) log << conversion_record(o) << '\n';
            write_file(cfg.workDir / "converted" / (dirName + ".jsonl"), log.str());
        }
        fs::path srcTree = fs::exists(convertedDir) ? convertedDir : inputRoot;

        fs::path wovenDir = cfg.workDir / "woven" / dirName;
        if (stages.count(Stage::Weave)) {
            PackageUnit src = strip_tests(scan_package(srcTree, false));
            fs::path tableDir = cfg.workDir / "predictions" / dirName;
            if (!cfg.predictionsDir.empty()) {
                fs::remove_all(tableDir);
                fs::path external = cfg.predictionsDir / dirName;
                if (fs::exists(external)) {
                    fs::create_directories(tableDir.parent_path());
                    fs::copy(external, tableDir, fs::copy_options::recursive);
                }
            }
            PredictionSet predictions = load_predictions(tableDir, cfg.predictionFormat);
            fs::remove_all(wovenDir);
            WeavePackageResult woven = weave_package(src, predictions, wovenDir);
            std::ostringstream log;
            for (const FileWeaveRecord& r : woven.log) log << weave_record(r) << '\n';
            write_file(cfg.workDir / "woven" / (dirName + ".jsonl"), log.str());
        } else if (stages.count(Stage::PredictFim)) {
            PackageUnit src = strip_tests(scan_package(srcTree, false));
            fs::remove_all(wovenDir);
            FimWeaveOutcome fim = fim_weave_package(src, client, cfg.fim, wovenDir);
            write_file(cfg.workDir / "predictions" / (dirName + ".jsonl"), fim.log);
            if (fim.endpointDown) {
                rep.failure = "completion endpoint unavailable";
                return;
            }
        }

        if (!fs::exists(wovenDir)) return;
        rep.migrated = true;

        fs::path checkedDir = cfg.workDir / "checked" / dirName;
        fs::path checkLog = cfg.workDir / "checked" / (dirName + ".jsonl");
        fs::path accuracyLog = cfg.workDir / "checked" / (dirName + ".accuracy.json");
        CheckResult check;
        if (stages.count(Stage::Check)) {
            fs::remove_all(checkedDir);
            fs::remove(accuracyLog);
            fs::create_directories(checkedDir.parent_path());
            fs::copy(wovenDir, checkedDir, fs::copy_options::recursive);
            CompileConfig compile;
            compile.compilerPath = cfg.compilerPath;
            compile.timeout = cfg.checkTimeout;
            check = type_check(checkedDir, compile);
            check.package = rep.name;
            write_file(checkLog, check_record(check) + "\n");
            if (input.hasDeclarations && !check.timedOut) {
                CheckResult emitted = emit_declarations(checkedDir, compile);
                if (emitted.declarationsDir) {
                    std::vector<SignatureRecord> truth =
                        signatures_from(declaration_files(inputRoot));
                    std::vector<SignatureRecord> generated =
                        signatures_from(declaration_files(*emitted.declarationsDir));
                    rep.accuracy = compare_signatures(truth, generated);
                    write_file(accuracyLog, accuracy_record(*rep.accuracy));
                }
            }
        } else if (auto loaded = load_check_record(checkLog)) {
            check = *loaded;
            rep.accuracy = load_accuracy_record(accuracyLog);
        }

        rep.timedOut = check.timedOut;
        rep.typeChecks = check.typeChecks;
        rep.totalFiles = check.filesChecked;
        rep.errorFreeFiles = check.errorFreeFiles;
        rep.errorCount = check.diagnostics.size();
        for (const Diagnostic& d : check.diagnostics) ++rep.errorCodeHistogram[d.code];

        fs::path tallyTree = fs::exists(checkedDir) ? checkedDir : wovenDir;
        AnnotationTally tally = count_annotations(scan_package(tallyTree, false), true, check);
        rep.totalAnnotations = tally.total;
        rep.trivialAnnotations = tally.trivial;
    }
};

}  // namespace

MigrationReport run_pipeline(const PipelineConfig& cfg) {
    if (cfg.inputDir.empty() || !fs::is_directory(cfg.inputDir))
        throw PipelineConfigError("input directory " + cfg.inputDir.string() +
                                  " does not exist");
    if (cfg.workDir.empty()) throw PipelineConfigError("work directory is required");

    bool haveEndpoint = static_cast<bool>(cfg.fimClient) || cfg.endpointUrl.has_value();
    std::set<Stage> stages = cfg.stages;
    if (stages.empty()) {
        stages = {Stage::Convert, Stage::Check, Stage::Report};
        stages.insert(haveEndpoint ? Stage::PredictFim : Stage::Weave);
    }
    if (stages.count(Stage::Weave) && stages.count(Stage::PredictFim))
        throw PipelineConfigError(
            "weave and predict-fim are alternative prediction sources; select one");
    if (stages.count(Stage::PredictFim) && !haveEndpoint)
        throw PipelineConfigError("predict-fim needs an endpoint URL or a client");
    if (stages.count(Stage::Weave) && cfg.predictionsDir.empty() &&
        !fs::exists(cfg.workDir / "predictions"))
        throw PipelineConfigError(
            "weave needs prediction tables: pass a predictions directory or seed "
            "<work>/predictions");
    if (stages.count(Stage::Check) && !stages.count(Stage::Weave) &&
        !stages.count(Stage::PredictFim) && !fs::exists(cfg.workDir / "woven"))
        throw PipelineConfigError(
            "check needs woven trees: select a weaving stage or seed <work>/woven");

    Runner runner{cfg, stages, {}};
    if (stages.count(Stage::PredictFim))
        runner.client = cfg.fimClient ? cfg.fimClient : http_fim_client(*cfg.endpointUrl);

    std::vector<std::string> dirs;
    for (const auto& entry : fs::directory_iterator(cfg.inputDir)) {
        if (!entry.is_directory()) continue;
        std::string name = entry.path().filename().string();
        if (name.starts_with('.') || name == "node_modules") continue;
        dirs.push_back(std::move(name));
    }
    std::sort(dirs.begin(), dirs.end());

    fs::create_directories(cfg.workDir);

    std::vector<PackageReport> results(dirs.size());
    size_t workers = std::max<size_t>(cfg.concurrency, 1);
    workers = std::min(workers, std::max<size_t>(dirs.size(), 1));
    std::atomic<size_t> next{0};
    auto drain = [&] {
        for (size_t i = next.fetch_add(1); i < dirs.size(); i = next.fetch_add(1))
            results[i] = runner.process(dirs[i]);
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
    for (std::thread& t : pool) t.join();

    MigrationReport report = build_report(std::move(results));
    if (stages.count(Stage::Report)) write_report_files(report, cfg.workDir / "report");
    return report;
}

}  // namespace tsweave
