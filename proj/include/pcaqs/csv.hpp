#pragma once

#include "pcaqs/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_cell(const std::string& raw, std::size_t row, std::size_t col,
                         const std::string& col_name) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || s.empty() || !std::isfinite(v))
        throw std::runtime_error("load_csv: cell at data row " + std::to_string(row + 1) +
                                 ", column '" + col_name + "' is not a finite number: '" +
                                 s + "'");
    (void)col;
    return v;
}

}  // namespace detail

/// Load a comma-delimited, header-first CSV of finite reals. When
/// label_column names a column, its cells must be exactly "0" or "1" and are
/// moved out of values into labels.
inline DataMatrix load_csv(const std::string& path,
                           const std::optional<std::string>& label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv: '" + path + "' is empty (header row required)");
    std::vector<std::string> header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);

    int label_idx = -1;
    if (label_column) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == *label_column) label_idx = static_cast<int>(j);
        if (label_idx < 0)
            throw std::runtime_error("load_csv: label column '" + *label_column +
                                     "' not found in header");
    }

    const std::size_t width = header.size();
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != width)
            throw std::runtime_error("load_csv: data row " + std::to_string(row_no + 1) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, header has " + std::to_string(width));
        std::vector<double> row;
        row.reserve(width - (label_idx >= 0 ? 1 : 0));
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<int>(j) == label_idx) {
                const std::string s = detail::trim(cells[j]);
                if (s == "0")
                    labels.push_back(0);
                else if (s == "1")
                    labels.push_back(1);
                else
                    throw std::runtime_error("load_csv: label at data row " +
                                             std::to_string(row_no + 1) + " is '" + s +
                                             "', expected 0 or 1");
            } else {
                row.push_back(detail::parse_cell(cells[j], row_no, j, header[j]));
            }
        }
        rows.push_back(std::move(row));
        ++row_no;
    }
    if (rows.empty()) throw std::runtime_error("load_csv: '" + path + "' has no data rows");

    DataMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    for (std::size_t j = 0; j < width; ++j)
        if (static_cast<int>(j) != label_idx) out.feature_names.push_back(header[j]);
    if (label_idx >= 0) {
        out.labels = Eigen::VectorXi(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i)
            (*out.labels)(static_cast<Eigen::Index>(i)) = labels[i];
    }
    validate_data(out);
    return out;
}

/// Write features (and the label column, when present) with enough digits to
/// round-trip through load_csv.
inline void write_csv(const DataMatrix& data, const std::string& path,
                      const std::string& label_name = "label") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");

    for (Eigen::Index j = 0; j < data.d(); ++j) {
        if (j) out << ',';
        out << (data.feature_names.empty() ? "f" + std::to_string(j)
                                           : data.feature_names[static_cast<std::size_t>(j)]);
    }
    if (data.labels) out << ',' << label_name;
    out << '\n';

    char buf[40];
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.d(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", data.values(i, j));
            out << buf;
        }
        if (data.labels) out << ',' << (*data.labels)(i);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write to '" + path + "' failed");
}

}  // namespace pcaqs
