#pragma once

// Comma-separated input: UTF-8, header row required, '.' decimal separator,
// empty cells read as missing (NaN). Double-quoted fields are supported.

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "presto/core.hpp"

namespace presto {

struct Dataset {
    std::vector<std::string> feature_names;
    std::string target_name;
    FeatureMatrix x;
    /// Empty when the input carried no target column.
    std::vector<double> y;

    std::size_t rows() const { return x.rows(); }
    bool has_target() const { return !target_name.empty(); }

    Dataset subset(std::span<const std::size_t> indices) const {
        Dataset out;
        out.feature_names = feature_names;
        out.target_name = target_name;
        out.x = x.select_rows(indices);
        if (!y.empty()) {
            out.y = select<double>(y, indices);
        }
        return out;
    }
};

namespace csv {

inline std::vector<std::string> split_line(std::string_view line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (quoted) {
        throw DataError("line " + std::to_string(line_number) + ": unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Parses a numeric cell; empty means missing. nullopt when not a number.
inline std::optional<double> parse_cell(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace csv

/// Reads a dataset from CSV text. When `target` is non-empty the named
/// column becomes y and must be numeric and present in every row; when
/// `target_optional` is set, a missing target column is tolerated.
inline Dataset read_csv(std::istream& in, const std::string& target, bool target_optional = false) {
    std::string line;
    std::size_t line_number = 1;
    if (!std::getline(in, line)) {
        throw DataError("CSV input is empty (a header row is required)");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    auto header = csv::split_line(line, line_number);
    for (auto& h : header) {
        h = std::string(csv::trim(h));
    }
    std::optional<std::size_t> target_index;
    if (!target.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == target) {
                target_index = i;
                break;
            }
        }
        if (!target_index && !target_optional) {
            throw DataError("target column '" + target + "' not found in CSV header");
        }
    }

    Dataset data;
    if (target_index) {
        data.target_name = target;
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!target_index || i != *target_index) {
            data.feature_names.push_back(header[i]);
        }
    }
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto fields = csv::split_line(line, line_number);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_number) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto value = csv::parse_cell(fields[i]);
            if (!value) {
                throw DataError("line " + std::to_string(line_number) + ", column '" + header[i] +
                                "': non-numeric value '" + fields[i] + "'");
            }
            if (target_index && i == *target_index) {
                if (!std::isfinite(*value)) {
                    throw DataError("line " + std::to_string(line_number) + ": target '" + target +
                                    "' is missing or not finite");
                }
                data.y.push_back(*value);
            } else {
                values.push_back(*value);
            }
        }
        ++rows;
    }
    data.x = FeatureMatrix(rows, data.feature_names.size(), std::move(values));
    return data;
}

inline Dataset read_csv_file(const std::string& path, const std::string& target, bool target_optional = false) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    try {
        return read_csv(in, target, target_optional);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace presto
