#include "tsweave/csv.hpp"

namespace tsweave {

std::vector<std::vector<std::string>> read_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    std::string field;
    size_t i = 0;
    bool inQuotes = false;
    bool fieldWasQuoted = false;
    bool rowHasContent = false;

    auto end_field = [&]() {
        fields.push_back(std::move(field));
        field.clear();
        fieldWasQuoted = false;
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(fields));
        fields.clear();
        rowHasContent = false;
    };

    while (i < text.size()) {
        char c = text[i];
        if (inQuotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    inQuotes = false;
                    i++;
                }
            } else {
                field += c;
                i++;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || fieldWasQuoted) {
                    throw CsvError(rows.size(), "quote inside unquoted field");
                }
                inQuotes = true;
                fieldWasQuoted = true;
                rowHasContent = true;
                i++;
                break;
            case ',':
                end_field();
                rowHasContent = true;
                i++;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') i++;
                [[fallthrough]];
            case '\n':
                end_row();
                i++;
                break;
            default:
                field += c;
                rowHasContent = true;
                i++;
        }
    }
    if (inQuotes) throw CsvError(rows.size(), "unterminated quoted field");
    if (rowHasContent || !fields.empty()) end_row();
    return rows;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); i++) {
        if (i) out += ',';
        const std::string& f = fields[i];
        bool needsQuote = f.find_first_of(",\"\r\n") != std::string::npos;
        if (needsQuote) {
            out += '"';
            for (char c : f) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    out += '\n';
    return out;
}

}  // namespace tsweave
