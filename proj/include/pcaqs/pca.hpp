#pragma once

#include "pcaqs/data.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pcaqs {

/// Principal component model fitted by thin SVD of the standardized matrix.
/// Eigenvalues follow the sample-covariance convention: lambda_j = s_j^2/(n-1).
struct PcaModel {
    Eigen::MatrixXd components;                // k x d, orthonormal rows
    Eigen::VectorXd singular_values;           // length k, nonincreasing
    Eigen::VectorXd explained_variance_ratio;  // length k
    Eigen::Index d_total = 0;
    Eigen::VectorXd eigenvalues_full;          // length min(n-1, d)

    Eigen::Index k() const { return components.rows(); }

    /// Explained-variance ratios over the full retained spectrum; sums to 1
    /// on full-rank input.
    Eigen::VectorXd full_ratios() const {
        const double total = eigenvalues_full.sum();
        if (total <= 0.0) throw std::runtime_error("PcaModel: empty spectrum");
        return eigenvalues_full / total;
    }
};

namespace detail {

// Sign convention: flip each loading vector so its largest-magnitude
// coordinate is positive (first such coordinate on exact ties).
inline void fix_component_signs(Eigen::MatrixXd& components) {
    for (Eigen::Index i = 0; i < components.rows(); ++i) {
        Eigen::Index arg = 0;
        double best = 0.0;
        for (Eigen::Index j = 0; j < components.cols(); ++j) {
            const double mag = std::abs(components(i, j));
            if (mag > best) {
                best = mag;
                arg = j;
            }
        }
        if (components(i, arg) < 0.0) components.row(i) = -components.row(i);
    }
}

}  // namespace detail

/// Fit PCA on an already-standardized matrix, keeping at most k_max
/// components. Singular values below 1e-10 * s_1 are treated as numerical
/// rank deficiency and dropped.
inline PcaModel fit_pca(const Eigen::MatrixXd& standardized, int k_max) {
    const Eigen::Index n = standardized.rows();
    const Eigen::Index d = standardized.cols();
    if (n < 2) throw std::invalid_argument("fit_pca: need n >= 2");
    const Eigen::Index limit = std::min<Eigen::Index>(n - 1, d);
    if (k_max < 1 || k_max > limit)
        throw std::invalid_argument("fit_pca: k_max must lie in [1, min(n-1,d)] = [1, " +
                                    std::to_string(limit) + "]");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(standardized, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    Eigen::Index rank = 0;
    const double tol = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sv.size(), limit); ++i)
        if (sv(i) > tol) ++rank;
    if (rank == 0) throw std::invalid_argument("fit_pca: input matrix is numerically zero");

    PcaModel model;
    model.d_total = d;
    model.eigenvalues_full = Eigen::VectorXd::Zero(limit);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sv.size(), limit); ++i)
        model.eigenvalues_full(i) = sv(i) * sv(i) / static_cast<double>(n - 1);

    const Eigen::Index k = std::min<Eigen::Index>(k_max, rank);
    model.components = svd.matrixV().leftCols(k).transpose();
    detail::fix_component_signs(model.components);
    model.singular_values = sv.head(k);

    const double total = model.eigenvalues_full.sum();
    model.explained_variance_ratio = model.eigenvalues_full.head(k) / total;
    return model;
}

/// Project rows (standardized with the same Scaler as the fit) onto the
/// retained components: scores = X * V_k.
inline Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& standardized) {
    if (standardized.cols() != model.d_total)
        throw std::invalid_argument("project: expected " + std::to_string(model.d_total) +
                                    " columns, got " + std::to_string(standardized.cols()));
    return standardized * model.components.transpose();
}

struct KSelection {
    int k = 1;
    bool threshold_unmet = false;  // V unreachable within the cap
};

/// Smallest k whose cumulative explained-variance ratio reaches threshold,
/// capped (the cap realizes the k <= d/4 rule when the caller passes d/4).
inline KSelection select_k_variance(const Eigen::VectorXd& ratios, double threshold, int cap) {
    if (cap < 1) throw std::invalid_argument("select_k_variance: cap must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("select_k_variance: threshold must lie in (0,1)");
    if (ratios.size() == 0) throw std::invalid_argument("select_k_variance: empty spectrum");

    double cum = 0.0;
    for (Eigen::Index j = 0; j < ratios.size(); ++j) {
        cum += ratios(j);
        if (cum >= threshold) {
            const int k = static_cast<int>(j) + 1;
            if (k <= cap) return {k, false};
            return {cap, true};  // threshold reachable, but only beyond the cap
        }
    }
    return {std::min<int>(static_cast<int>(ratios.size()), cap), true};
}

inline int variance_cap(Eigen::Index d) {
    return std::max<int>(1, static_cast<int>(d / 4));
}

struct GapSelection {
    int k = 1;
    bool degenerate = false;  // all gaps zero
};

/// k at the largest eigenvalue gap lambda_k - lambda_{k+1}; ties break toward
/// the smallest k.
inline GapSelection select_k_spectral_gap(const Eigen::VectorXd& eigenvalues) {
    if (eigenvalues.size() < 2)
        throw std::invalid_argument("select_k_spectral_gap: need >= 2 eigenvalues");
    int best_k = 1;
    double best_gap = 0.0;
    for (Eigen::Index j = 0; j + 1 < eigenvalues.size(); ++j) {
        const double gap = eigenvalues(j) - eigenvalues(j + 1);
        if (gap > best_gap) {
            best_gap = gap;
            best_k = static_cast<int>(j) + 1;
        }
    }
    return {best_k, best_gap == 0.0};
}

/// JSON snapshot (components row-major, singular values, ratios) for
/// reproducibility audits.
inline nlohmann::json pca_model_to_json(const PcaModel& model) {
    nlohmann::json j;
    j["d_total"] = model.d_total;
    j["k"] = model.k();
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(model.k()));
    for (Eigen::Index i = 0; i < model.k(); ++i) {
        comps[static_cast<std::size_t>(i)].assign(model.components.row(i).begin(),
                                                  model.components.row(i).end());
    }
    j["components"] = comps;
    j["singular_values"] =
        std::vector<double>(model.singular_values.begin(), model.singular_values.end());
    j["explained_variance_ratio"] = std::vector<double>(
        model.explained_variance_ratio.begin(), model.explained_variance_ratio.end());
    j["eigenvalues_full"] =
        std::vector<double>(model.eigenvalues_full.begin(), model.eigenvalues_full.end());
    return j;
}

}  // namespace pcaqs
