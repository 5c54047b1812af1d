#pragma once

#include <string>
#include <vector>

namespace rollidx {

// Minimal CSV support for the engine's flat tabular inputs: comma-separated,
// one header row, no quoting or embedded commas.  Parse errors carry the file
// name and 1-based line number.

struct CsvTable {
    std::string path;                // as passed to read_csv, for messages
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // source line of each row
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& name);

// Field accessors that throw ValidationError naming file/line/column.
double csv_double(const CsvTable& table, std::size_t row, std::size_t col);
std::string csv_string(const CsvTable& table, std::size_t row, std::size_t col);

// Column index by header name; throws ValidationError listing the header.
std::size_t csv_column(const CsvTable& table, const std::string& name);

// Shortest decimal representation that parses back to the same double
// (std::to_chars), used by every serializer so artifacts are byte-stable and
// parse -> serialize -> parse is the identity.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace rollidx
