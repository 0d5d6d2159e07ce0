#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

/// Linear-interpolation empirical quantile (the common "type 7" rule) on an
/// already-sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
    if (!(level >= 0.0 && level <= 1.0))
        throw std::invalid_argument("quantile_sorted: level must lie in [0,1]");
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

/// Interior bin edges at levels j/m, j = 1..m-1. m = 1 yields no edges
/// (a single stratum). Duplicate edges are allowed; the empty bins they
/// create simply contribute no groups downstream.
inline Eigen::VectorXd compute_bin_edges(const Eigen::VectorXd& column, int m) {
    if (m < 1) throw std::invalid_argument("compute_bin_edges: m must be >= 1");
    if (column.size() < m)
        throw std::invalid_argument("compute_bin_edges: column length must be >= m");
    Eigen::VectorXd edges(m - 1);
    if (m == 1) return edges;
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    for (int j = 1; j < m; ++j)
        edges(j - 1) = quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(m));
    return edges;
}

/// Right-closed digitize: a value equal to an edge goes to the upper bin, so
/// bin(v) = #{edges <= v}, always in [0, m-1].
inline std::vector<int> assign_bins(const Eigen::VectorXd& column, const Eigen::VectorXd& edges) {
    for (Eigen::Index j = 0; j + 1 < edges.size(); ++j)
        if (edges(j) > edges(j + 1))
            throw std::invalid_argument("assign_bins: edges must be nondecreasing");
    std::vector<int> bins(static_cast<std::size_t>(column.size()));
    for (Eigen::Index i = 0; i < column.size(); ++i) {
        const double v = column(i);
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        bins[static_cast<std::size_t>(i)] = static_cast<int>(it - edges.begin());
    }
    return bins;
}

/// Per-component interior quantile edges for the score matrix. Edges must be
/// computed from training rows only; callers pass training scores here.
struct QuantileGrid {
    Eigen::MatrixXd edges;  // k x (m-1), each row nondecreasing
    int m = 1;
    int k = 1;

    /// m^k can overflow for large grids; saturates at a value > n for the
    /// sparseness check.
    bool sparse_for(Eigen::Index n) const {
        double cells = 1.0;
        for (int j = 0; j < k; ++j) {
            cells *= static_cast<double>(m);
            if (cells > static_cast<double>(n)) return true;
        }
        return cells > static_cast<double>(n);
    }
};

inline QuantileGrid build_grid(const Eigen::MatrixXd& scores, int m) {
    if (scores.cols() < 1) throw std::invalid_argument("build_grid: need >= 1 score column");
    QuantileGrid grid;
    grid.m = m;
    grid.k = static_cast<int>(scores.cols());
    grid.edges.resize(scores.cols(), m - 1);
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
        grid.edges.row(j) = compute_bin_edges(scores.col(j), m).transpose();
    return grid;
}

inline Eigen::MatrixXi bin_matrix(const Eigen::MatrixXd& scores, const QuantileGrid& grid) {
    if (scores.cols() != grid.edges.rows())
        throw std::invalid_argument("bin_matrix: score width != grid components");
    Eigen::MatrixXi bins(scores.rows(), scores.cols());
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const auto col_bins = assign_bins(scores.col(j), grid.edges.row(j).transpose());
        for (Eigen::Index i = 0; i < scores.rows(); ++i)
            bins(i, j) = col_bins[static_cast<std::size_t>(i)];
    }
    return bins;
}

/// Composite quantile groups: each row's key is its per-component bin indices
/// joined in component order.
struct GroupAssignment {
    std::vector<std::string> keys;                     // one per row
    std::map<std::string, std::vector<int>> group_index;  // key -> sorted row indices

    std::size_t n_rows() const { return keys.size(); }
    std::size_t n_groups() const { return group_index.size(); }
};

inline GroupAssignment composite_keys(const Eigen::MatrixXi& bins) {
    GroupAssignment out;
    out.keys.reserve(static_cast<std::size_t>(bins.rows()));
    for (Eigen::Index i = 0; i < bins.rows(); ++i) {
        std::string key;
        for (Eigen::Index j = 0; j < bins.cols(); ++j) {
            if (j) key += '-';
            key += std::to_string(bins(i, j));
        }
        out.group_index[key].push_back(static_cast<int>(i));
        out.keys.push_back(std::move(key));
    }
    return out;
}

/// Two-column audit export: row_index, key.
inline void write_assignment_csv(const GroupAssignment& assignment, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_assignment_csv: cannot open '" + path + "'");
    out << "row_index,key\n";
    for (std::size_t i = 0; i < assignment.keys.size(); ++i)
        out << i << ',' << assignment.keys[i] << '\n';
    if (!out) throw std::runtime_error("write_assignment_csv: write failed");
}

}  // namespace pcaqs
