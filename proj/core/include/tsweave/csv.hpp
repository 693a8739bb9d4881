#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsweave {

struct CsvError : std::runtime_error {
    CsvError(size_t rowIndex, const std::string& msg)
        : std::runtime_error("csv row " + std::to_string(rowIndex) + ": " + msg),
          row(rowIndex) {}
    size_t row;
};

// RFC 4180 reader: comma-separated, optional quoting with `""` escapes,
// quoted fields may contain commas and newlines. Accepts LF and CRLF row
// terminators. A trailing newline does not produce an empty final record.
std::vector<std::vector<std::string>> read_csv(std::string_view text);

// Writes one record, quoting fields that contain commas, quotes, or newlines.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace tsweave
