#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace splitperf::csv {

// Minimal comma-separated table support: header row plus string cells, no
// quoting (none of the formats here embed commas).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    int require_column(const std::string& name, const std::string& origin) const;
};

Table read_file(const std::filesystem::path& path);
Table parse(const std::string& text, const std::string& origin);

std::string format(const Table& table);
void write_file(const Table& table, const std::filesystem::path& path);

// Shortest round-trippable decimal form of a double (deterministic).
std::string num(double value);
// Fixed number of significant digits, for report output.
std::string num(double value, int significant_digits);

}  // namespace splitperf::csv
