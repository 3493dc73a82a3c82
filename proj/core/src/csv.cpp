#include "motorlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace motorlab::csv {

std::string number(double value) {
    // Shortest text that parses back to the same double.
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

std::string number(std::optional<double> value) { return value ? number(*value) : std::string{}; }

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::runtime_error("csv: missing column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size()) {
            throw std::runtime_error("csv: row width mismatch in " + path.string());
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write " + path.string());
    out << join(table.header) << '\n';
    for (const auto& row : table.rows) out << join(row) << '\n';
}

}  // namespace motorlab::csv
