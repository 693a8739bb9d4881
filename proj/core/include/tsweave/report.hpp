#pragma once

#include <filesystem>
#include <string>

#include "tsweave/metrics.hpp"

namespace tsweave {

// Schema version of the JSON report; bump on breaking field changes.
inline constexpr int kReportSchemaVersion = 1;

// The full report as one JSON document with sorted keys: schema version,
// per-package records, per-category and overall rollups, error code
// histogram, and the ECDF series. Content is a pure function of the report,
// so identical inputs serialize byte-identically.
std::string report_json(const MigrationReport& report);

// Human-readable tables: per-category rates, the top error codes, and the
// package list with failures called out.
std::string report_summary(const MigrationReport& report);

// Plot-ready series. `ecdf_csv` emits errors,proportion rows; the histogram
// emits code,count rows for the top codes plus Other.
std::string ecdf_csv(const MigrationReport& report);
std::string histogram_csv(const MigrationReport& report);

// The before/after comparison as text tables plus the four-way split of
// type-checking packages.
std::string comparison_summary(const BeforeAfterComparison& cmp);

// Writes report.json, summary.txt, ecdf.csv, and histogram.csv into outDir.
void write_report_files(const MigrationReport& report, const std::filesystem::path& outDir);

}  // namespace tsweave
