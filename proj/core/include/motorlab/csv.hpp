#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace motorlab::csv {

/// Shortest round-trip decimal rendering of a double ("%.17g").
std::string number(double value);
/// Empty string for nullopt.
std::string number(std::optional<double> value);

std::string join(const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws std::runtime_error naming the missing column.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Minimal reader for the comma-separated files this project writes (no quoting).
Table read(const std::filesystem::path& path);

void write(const std::filesystem::path& path, const Table& table);

}  // namespace motorlab::csv
