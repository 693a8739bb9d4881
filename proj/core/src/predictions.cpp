#include "tsweave/predictions.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tsweave/csv.hpp"

namespace tsweave {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

double parse_probability(size_t row, const std::string& field) {
    double value = 0.0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size())
        throw MalformedRow(row, "unparseable probability '" + field + "'");
    if (value < 0.0 || value > 1.0)
        throw MalformedRow(row, "probability " + field + " outside [0,1]");
    return value;
}

int parse_coordinate(size_t row, const std::string& field, int minimum) {
    int value = 0;
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size() || value < minimum)
        throw MalformedRow(row, "bad coordinate '" + field + "'");
    return value;
}

RankedCandidates parse_candidates(size_t row, const std::vector<std::string>& fields,
                                  size_t first) {
    size_t pairFields = fields.size() - first;
    if (pairFields % 2 != 0) throw MalformedRow(row, "dangling type without probability");
    size_t count = pairFields / 2;
    if (count > 5) throw MalformedRow(row, "more than five candidates");
    RankedCandidates out;
    for (size_t i = 0; i < count; ++i) {
        Candidate c;
        c.type = fields[first + 2 * i];
        c.prob = parse_probability(row, fields[first + 2 * i + 1]);
        if (!out.empty() && c.prob > out.back().prob)
            throw MalformedRow(row, "probabilities increase at rank " + std::to_string(i + 1));
        out.push_back(std::move(c));
    }
    return out;
}

std::string format_probability(double p) {
    std::ostringstream out;
    out << p;
    return std::move(out).str();
}

}  // namespace

TokenPredictionTable parse_token_predictions(std::string_view csvText) {
    TokenPredictionTable table;
    auto rows = read_csv(csvText);
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& fields = rows[i];
        if (fields.size() < 2) throw MalformedRow(i, "expected at least token text and kind");
        TokenPredictionRow row;
        row.text = fields[0];
        row.kind = fields[1];
        row.candidates = parse_candidates(i, fields, 2);
        table.rows.push_back(std::move(row));
    }
    return table;
}

TokenPredictionTable load_token_predictions(const std::string& path) {
    return parse_token_predictions(read_file(path));
}

LocationPredictionTable parse_location_predictions(std::string_view csvText) {
    LocationPredictionTable table;
    auto rows = read_csv(csvText);
    if (rows.empty()) return table;
    if (rows[0].empty() || rows[0][0] != "file")
        throw MalformedRow(0, "expected header starting with 'file'");
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& fields = rows[i];
        if (fields.size() < 7) throw MalformedRow(i, "expected span and at least one candidate");
        SpanKey key;
        key.line1 = parse_coordinate(i, fields[1], 1);
        key.col1 = parse_coordinate(i, fields[2], 0);
        key.line2 = parse_coordinate(i, fields[3], 1);
        key.col2 = parse_coordinate(i, fields[4], 0);
        auto candidates = parse_candidates(i, fields, 5);
        auto [_, inserted] = table.entries.emplace(key, std::move(candidates));
        if (!inserted)
            throw DuplicateSpan(i, "(" + fields[1] + "," + fields[2] + "," + fields[3] + "," +
                                       fields[4] + ")");
    }
    return table;
}

LocationPredictionTable load_location_predictions(const std::string& path) {
    return parse_location_predictions(read_file(path));
}

std::string serialize_token_predictions(const TokenPredictionTable& table) {
    std::string out;
    for (const auto& row : table.rows) {
        std::vector<std::string> fields{row.text, row.kind};
        for (const auto& c : row.candidates) {
            fields.push_back(c.type);
            fields.push_back(format_probability(c.prob));
        }
        out += csv_row(fields);
    }
    return out;
}

std::string serialize_location_predictions(const LocationPredictionTable& table,
                                           const std::string& fileName) {
    std::string out = "file,line1,col1,line2,col2,t1,p1,t2,p2,t3,p3,t4,p4,t5,p5\n";
    for (const auto& [key, candidates] : table.entries) {
        std::vector<std::string> fields{fileName, std::to_string(key.line1),
                                        std::to_string(key.col1), std::to_string(key.line2),
                                        std::to_string(key.col2)};
        for (const auto& c : candidates) {
            fields.push_back(c.type);
            fields.push_back(format_probability(c.prob));
        }
        out += csv_row(fields);
    }
    return out;
}

std::string normalize_type(const std::string& raw, PredictionFormat format) {
    if (raw == "Number") return "number";
    if (raw == "Boolean") return "boolean";
    if (raw == "String") return "string";
    if (raw == "Object") return "object";
    if (raw == "Void") return "void";
    if (raw == "Array") return "any[]";
    if (format == PredictionFormat::TokenAligned && raw == "complex") return "any";
    return raw;
}

}  // namespace tsweave
