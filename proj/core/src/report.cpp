#include "tsweave/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "tsweave/csv.hpp"

namespace tsweave {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string percent(std::optional<double> rate) {
    if (!rate) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << *rate * 100.0 << "%";
    return out.str();
}

ordered_json rate_or_null(std::optional<double> rate) {
    if (!rate) return nullptr;
    return *rate;
}

ordered_json accuracy_json(const AccuracyCount& acc) {
    return {
        {"compared", acc.compared},
        {"matched", acc.matched},
        {"skippedAnyGroundTruth", acc.skippedAnyGroundTruth},
        {"skippedAbsent", acc.skippedAbsent},
        {"arityMismatches", acc.arityMismatches},
    };
}

ordered_json rollup_json(const CategoryRollup& rollup) {
    return {
        {"packages", rollup.packages},
        {"migrated", rollup.migrated},
        {"timedOut", rollup.timedOut},
        {"typeChecking", rollup.typeChecking},
        {"typeCheckRate", rate_or_null(type_check_rate(rollup))},
        {"totalFiles", rollup.totalFiles},
        {"errorFreeFiles", rollup.errorFreeFiles},
        {"errorFreeFileRate", rate_or_null(error_free_file_rate(rollup))},
        {"errorCount", rollup.errorCount},
        {"totalAnnotations", rollup.totalAnnotations},
        {"trivialAnnotations", rollup.trivialAnnotations},
        {"trivialRatio", rate_or_null(trivial_ratio(rollup))},
        {"accuracy", accuracy_json(rollup.accuracy)},
        {"accuracyRate", rate_or_null(accuracy_rate(rollup))},
    };
}

ordered_json package_json(const PackageReport& p) {
    ordered_json j = {
        {"name", p.name},
        {"category", to_string(p.category)},
        {"migrated", p.migrated},
        {"failure", p.failure},
        {"timedOut", p.timedOut},
        {"typeChecks", p.typeChecks},
        {"totalFiles", p.totalFiles},
        {"errorFreeFiles", p.errorFreeFiles},
        {"errorCount", p.errorCount},
        {"errorCodeHistogram", p.errorCodeHistogram},
        {"totalAnnotations", p.totalAnnotations},
        {"trivialAnnotations", p.trivialAnnotations},
    };
    j["accuracy"] = p.accuracy ? accuracy_json(*p.accuracy) : ordered_json(nullptr);
    return j;
}

}  // namespace

std::string report_json(const MigrationReport& report) {
    ordered_json j;
    j["schemaVersion"] = kReportSchemaVersion;

    ordered_json packages = ordered_json::array();
    for (const auto& p : report.packages) packages.push_back(package_json(p));
    j["packages"] = std::move(packages);

    ordered_json byCategory = ordered_json::object();
    for (const auto& [category, rollup] : report.byCategory)
        byCategory[to_string(category)] = rollup_json(rollup);
    j["byCategory"] = std::move(byCategory);
    j["overall"] = rollup_json(report.overall);

    j["errorCodeHistogram"] = report.errorCodeHistogram;

    ordered_json ecdf = ordered_json::array();
    for (const auto& point : report.ecdf)
        ecdf.push_back({{"errors", point.errorCount}, {"proportion", point.proportion}});
    j["ecdf"] = std::move(ecdf);

    return j.dump(2) + "\n";
}

std::string report_summary(const MigrationReport& report) {
    std::ostringstream out;
    out << "Migration summary\n";
    out << "=================\n\n";

    auto row = [&out](const std::string& label, const CategoryRollup& r) {
        out << "  " << std::left << std::setw(28) << label << std::right << std::setw(4)
            << r.packages << " pkgs  type-check " << std::setw(6) << percent(type_check_rate(r))
            << "  error-free files " << std::setw(6) << percent(error_free_file_rate(r))
            << "  trivial " << std::setw(6) << percent(trivial_ratio(r)) << "  accuracy "
            << std::setw(6) << percent(accuracy_rate(r)) << "\n";
    };
    for (const auto& [category, rollup] : report.byCategory) row(to_string(category), rollup);
    row("Overall", report.overall);

    out << "\nTop error codes\n";
    out << "---------------\n";
    for (const auto& bucket : top_error_codes(report.errorCodeHistogram))
        out << "  " << std::left << std::setw(8) << bucket.code << std::right << std::setw(8)
            << bucket.count << "\n";

    out << "\nPackages\n";
    out << "--------\n";
    for (const auto& p : report.packages) {
        out << "  " << std::left << std::setw(28) << p.name;
        if (!p.migrated)
            out << "failed: " << p.failure;
        else if (p.timedOut)
            out << "timed out";
        else
            out << (p.typeChecks ? "type checks" : "has errors") << " (" << p.errorFreeFiles << "/"
                << p.totalFiles << " files error-free, " << p.errorCount << " errors)";
        out << "\n";
    }
    return out.str();
}

std::string ecdf_csv(const MigrationReport& report) {
    std::string out = csv_row({"errors", "proportion"});
    for (const auto& point : report.ecdf) {
        std::ostringstream proportion;
        proportion << point.proportion;
        out += csv_row({std::to_string(point.errorCount), proportion.str()});
    }
    return out;
}

std::string histogram_csv(const MigrationReport& report) {
    std::string out = csv_row({"code", "count"});
    for (const auto& bucket : top_error_codes(report.errorCodeHistogram))
        out += csv_row({bucket.code, std::to_string(bucket.count)});
    return out;
}

std::string comparison_summary(const BeforeAfterComparison& cmp) {
    std::ostringstream out;
    out << "Before/after module conversion\n";
    out << "==============================\n\n";
    out << "  " << std::left << std::setw(28) << "Category" << "  type-check      "
        << "error-free      " << "accuracy\n";
    for (const auto& row : cmp.rows) {
        out << "  " << std::left << std::setw(28) << row.category << "  " << std::right
            << std::setw(6) << percent(row.typeCheckBefore) << " > " << std::setw(6)
            << percent(row.typeCheckAfter) << "  " << std::setw(6) << percent(row.errorFreeBefore)
            << " > " << std::setw(6) << percent(row.errorFreeAfter) << "  " << std::setw(6)
            << percent(row.accuracyBefore) << " > " << std::setw(6) << percent(row.accuracyAfter)
            << "\n";
    }

    auto list = [&out](const std::string& label, const std::vector<std::string>& names) {
        out << "  " << std::left << std::setw(24) << label << names.size() << "\n";
        for (const auto& name : names) out << "    " << name << "\n";
    };
    out << "\nType-checking packages\n";
    out << "----------------------\n";
    list("both runs:", cmp.typeChecksBoth);
    list("before only:", cmp.typeChecksBeforeOnly);
    list("after only:", cmp.typeChecksAfterOnly);
    list("neither:", cmp.typeChecksNeither);
    return out.str();
}

void write_report_files(const MigrationReport& report, const std::filesystem::path& outDir) {
    std::filesystem::create_directories(outDir);
    auto write = [&outDir](const char* name, const std::string& content) {
        std::ofstream out(outDir / name, std::ios::binary);
        out << content;
    };
    write("report.json", report_json(report));
    write("summary.txt", report_summary(report));
    write("ecdf.csv", ecdf_csv(report));
    write("histogram.csv", histogram_csv(report));
}

}  // namespace tsweave
