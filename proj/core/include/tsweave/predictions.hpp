#pragma once

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsweave {

struct MalformedRow : std::runtime_error {
    MalformedRow(size_t rowIndex, const std::string& msg)
        : std::runtime_error("prediction row " + std::to_string(rowIndex) + ": " + msg),
          row(rowIndex) {}
    size_t row;
};

struct DuplicateSpan : std::runtime_error {
    DuplicateSpan(size_t rowIndex, const std::string& span)
        : std::runtime_error("prediction row " + std::to_string(rowIndex) +
                             ": duplicate span " + span),
          row(rowIndex) {}
    size_t row;
};

struct Candidate {
    std::string type;
    double prob = 0.0;
    bool operator==(const Candidate&) const = default;
};

// Ranked best-first; nonempty where attached, at most five, probabilities
// non-increasing.
using RankedCandidates = std::vector<Candidate>;

// One row of the token-aligned format. An empty candidate list means the
// predictor emitted no types for this token (typically a non-identifier).
struct TokenPredictionRow {
    std::string text;
    std::string kind;
    RankedCandidates candidates;
    bool operator==(const TokenPredictionRow&) const = default;
};

struct TokenPredictionTable {
    std::vector<TokenPredictionRow> rows;
};

// 1-based lines, 0-based columns, end exclusive.
struct SpanKey {
    int line1 = 0;
    int col1 = 0;
    int line2 = 0;
    int col2 = 0;
    auto operator<=>(const SpanKey&) const = default;
};

struct LocationPredictionTable {
    std::map<SpanKey, RankedCandidates> entries;
};

// Token-aligned CSV: no header, rows of `text,kind` or `text,kind,(type,prob)x k`
// for k up to 5. Throws MalformedRow on wrong arity, unparseable or
// out-of-range probability, or probabilities increasing in rank order.
TokenPredictionTable parse_token_predictions(std::string_view csvText);
TokenPredictionTable load_token_predictions(const std::string& path);

// Location-keyed CSV: header `file,line1,col1,line2,col2,t1,p1,...,t5,p5`,
// then rows of `file,line1,col1,line2,col2,(type,prob)x k`. One CSV describes
// one source file; the file column is provenance and is not part of the key.
// Throws MalformedRow and DuplicateSpan.
LocationPredictionTable parse_location_predictions(std::string_view csvText);
LocationPredictionTable load_location_predictions(const std::string& path);

// Serializers for the same layouts (used for round-trip checks and fixture
// generation). serialize_location_predictions stamps `fileName` into the
// provenance column.
std::string serialize_token_predictions(const TokenPredictionTable& table);
std::string serialize_location_predictions(const LocationPredictionTable& table,
                                           const std::string& fileName);

enum class PredictionFormat { TokenAligned, LocationKeyed };

// Canonicalizes predicted type names: Number/Boolean/String/Object/Void to
// their lowercase forms, Array to any[], and (token-aligned only) the
// catch-all `complex` to any. Everything else passes through. Idempotent.
std::string normalize_type(const std::string& raw, PredictionFormat format);

}  // namespace tsweave
