#include "splitperf/csv.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace splitperf::csv {

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int Table::require_column(const std::string& name, const std::string& origin) const {
    int idx = column(name);
    if (idx < 0)
        throw std::runtime_error(origin + ": missing required column '" + name + "'");
    return idx;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Table parse(const std::string& text, const std::string& origin) {
    Table table;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw std::runtime_error(origin + ": missing header row");
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::string format(const Table& table) {
    std::ostringstream os;
    auto emit = [&os](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return os.str();
}

void write_file(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV file: " + path.string());
    out << format(table);
}

std::string num(double value) {
    char buf[64];
    // Shortest form that parses back to the same double.
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    return buf;
}

std::string num(double value, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
    return buf;
}

}  // namespace splitperf::csv
