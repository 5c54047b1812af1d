#include "rollidx/core/csv.hpp"

#include "rollidx/core/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rollidx {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.back() == ' ' || f.back() == '\r' || f.back() == '\t')) f.pop_back();
        std::size_t lead = 0;
        while (lead < f.size() && (f[lead] == ' ' || f[lead] == '\t')) ++lead;
        f.erase(0, lead);
    }
    return fields;
}

std::string cell_context(const CsvTable& table, std::size_t row, std::size_t col) {
    std::string name = col < table.header.size() ? table.header[col] : ("#" + std::to_string(col));
    return table.path + ":" + std::to_string(table.line_numbers[row]) + " column '" + name + "'";
}

} // namespace

CsvTable parse_csv(const std::string& text, const std::string& name) {
    CsvTable table;
    table.path = name;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw ValidationError(name + ":" + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty())
        throw ValidationError(name + ": empty CSV (no header row)");
    return table;
}

CsvTable read_csv(const std::string& path) {
    return parse_csv(read_text_file(path), path);
}

double csv_double(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& field = table.rows[row][col];
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw ValidationError(cell_context(table, row, col) + ": expected number, got '" + field + "'");
    return value;
}

std::string csv_string(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& field = table.rows[row][col];
    if (field.empty())
        throw ValidationError(cell_context(table, row, col) + ": empty field");
    return field;
}

std::size_t csv_column(const CsvTable& table, const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == name) return i;
    std::string header;
    for (const auto& h : table.header) header += (header.empty() ? "" : ",") + h;
    throw ValidationError(table.path + ": missing column '" + name + "' (header: " + header + ")");
}

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << content;
    if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace rollidx
