#pragma once

#include "pcaqs/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pcaqs {

struct Histogram {
    Eigen::VectorXd probs;  // length B, sums to 1
    Eigen::VectorXd edges;  // length B+1
};

/// Equal-width histogram over [lo, hi]; values outside the range are clamped
/// into the boundary bins so the construction is total.
inline Histogram make_histogram(const Eigen::VectorXd& values, double lo, double hi, int bins) {
    if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
    if (values.size() == 0) throw std::invalid_argument("make_histogram: empty sample");
    if (!(hi >= lo)) throw std::invalid_argument("make_histogram: need hi >= lo");

    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges(b) = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    h.probs = Eigen::VectorXd::Zero(bins);
    const double width = hi - lo;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        int b = 0;
        if (width > 0.0)
            b = static_cast<int>(std::floor((values(i) - lo) / width * bins));
        b = std::clamp(b, 0, bins - 1);
        h.probs(b) += 1.0;
    }
    h.probs /= static_cast<double>(values.size());
    return h;
}

/// Two-cell class-frequency histogram for {0,1} labels.
inline Histogram label_histogram(const Eigen::VectorXi& labels) {
    if (labels.size() == 0) throw std::invalid_argument("label_histogram: empty labels");
    Histogram h;
    h.edges.resize(3);
    h.edges << 0.0, 0.5, 1.0;
    h.probs = Eigen::VectorXd::Zero(2);
    for (Eigen::Index i = 0; i < labels.size(); ++i) h.probs(labels(i) == 1 ? 1 : 0) += 1.0;
    h.probs /= static_cast<double>(labels.size());
    return h;
}

namespace detail {

inline void require_same_edges(const Histogram& p, const Histogram& q, const char* who) {
    if (p.edges.size() != q.edges.size() ||
        (p.edges - q.edges).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument(std::string(who) + ": histograms have mismatched edges");
}

}  // namespace detail

/// KL(P||Q) = sum_i P(i) log(P(i)/Q(i)), natural log. Both histograms get
/// eps additive smoothing and renormalization first, which keeps the value
/// finite and exactly zero when P = Q.
inline double kl_divergence(const Histogram& p, const Histogram& q, double eps = 1e-10) {
    detail::require_same_edges(p, q, "kl_divergence");
    const double bp = static_cast<double>(p.probs.size());
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
        const double pi = (p.probs(i) + eps) / (1.0 + bp * eps);
        const double qi = (q.probs(i) + eps) / (1.0 + bp * eps);
        kl += pi * std::log(pi / qi);
    }
    return std::max(kl, 0.0);
}

/// JS(P,Q) = [KL(P||M) + KL(Q||M)]/2 with M = (P+Q)/2. M is positive wherever
/// P or Q is, so the raw sum (0 log 0 = 0) needs no smoothing; the result is
/// symmetric and bounded by ln 2.
inline double js_divergence(const Histogram& p, const Histogram& q) {
    detail::require_same_edges(p, q, "js_divergence");
    double js = 0.0;
    for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
        const double m = 0.5 * (p.probs(i) + q.probs(i));
        if (p.probs(i) > 0.0) js += 0.5 * p.probs(i) * std::log(p.probs(i) / m);
        if (q.probs(i) > 0.0) js += 0.5 * q.probs(i) * std::log(q.probs(i) / m);
    }
    return std::clamp(js, 0.0, std::log(2.0));
}

namespace detail {

inline void require_point_sets(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const char* who) {
    if (x.rows() == 0 || y.rows() == 0)
        throw std::invalid_argument(std::string(who) + ": empty point set");
    if (x.cols() != y.cols())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Mean pairwise Euclidean distance over all ordered pairs, diagonal included
// (V-statistic convention: zero self-distances stay in the average).
inline double mean_cross_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < y.rows(); ++j)
            s += (x.row(i) - y.row(j)).norm();
    return s / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

inline double mean_cross_kernel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                double gamma) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < y.rows(); ++j)
            s += std::exp(-gamma * (x.row(i) - y.row(j)).squaredNorm());
    return s / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

}  // namespace detail

/// Energy distance 2 E||X-Y|| - E||X-X'|| - E||Y-Y'|| with all expectations
/// as plain means over every pair.
inline double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    detail::require_point_sets(x, y, "energy_distance");
    return 2.0 * detail::mean_cross_distance(x, y) - detail::mean_cross_distance(x, x) -
           detail::mean_cross_distance(y, y);
}

/// Squared MMD, biased V-statistic estimator with the RBF kernel
/// k(x,y) = exp(-gamma ||x-y||^2).
inline double mmd_rbf(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double gamma = 1.0) {
    detail::require_point_sets(x, y, "mmd_rbf");
    return detail::mean_cross_kernel(x, x, gamma) + detail::mean_cross_kernel(y, y, gamma) -
           2.0 * detail::mean_cross_kernel(x, y, gamma);
}

/// Mean Mahalanobis distance of sampled points under the full-data (mu,
/// Sigma), with ridge regularization Sigma + 1e-8 tr(Sigma)/d I.
inline double mahalanobis_score(const Eigen::MatrixXd& sample, const Eigen::VectorXd& mu,
                                const Eigen::MatrixXd& sigma) {
    if (sample.rows() == 0) throw std::invalid_argument("mahalanobis_score: empty sample");
    if (sample.cols() != mu.size() || sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw std::invalid_argument("mahalanobis_score: dimension mismatch");

    const Eigen::Index d = mu.size();
    Eigen::MatrixXd reg = sigma;
    reg.diagonal().array() += 1e-8 * sigma.trace() / static_cast<double>(d);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
        throw std::runtime_error("mahalanobis_score: covariance singular after regularization");

    double total = 0.0;
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
        const Eigen::VectorXd diff = sample.row(i).transpose() - mu;
        const double q = diff.dot(ldlt.solve(diff));
        total += std::sqrt(std::max(q, 0.0));
    }
    return total / static_cast<double>(sample.rows());
}

/// Quantile-matched pairwise-distance comparison: draw n_pairs random
/// distinct pairs from each set (the same seed stream for both, so identical
/// same-size sets compare their own pairs), sort the two distance samples and
/// average the absolute gaps. The all-pairs formula assumes a common index
/// set, which different-size sets do not have.
inline double pairwise_distance_difference(const Eigen::MatrixXd& x_ref,
                                           const Eigen::MatrixXd& x_sam, int n_pairs = 10000,
                                           std::uint64_t seed = 0) {
    detail::require_point_sets(x_ref, x_sam, "pairwise_distance_difference");
    if (x_ref.rows() < 2 || x_sam.rows() < 2)
        throw std::invalid_argument("pairwise_distance_difference: need >= 2 points per set");
    if (n_pairs < 1)
        throw std::invalid_argument("pairwise_distance_difference: n_pairs must be >= 1");

    const auto sample_distances = [&](const Eigen::MatrixXd& pts) {
        Rng rng = make_rng(seed, "pairs");
        const std::size_t n = static_cast<std::size_t>(pts.rows());
        std::vector<double> dists(static_cast<std::size_t>(n_pairs));
        for (auto& dist : dists) {
            const std::size_t i = uniform_index(rng, n);
            std::size_t j = uniform_index(rng, n - 1);
            if (j >= i) ++j;
            dist = (pts.row(static_cast<Eigen::Index>(i)) - pts.row(static_cast<Eigen::Index>(j)))
                       .norm();
        }
        std::sort(dists.begin(), dists.end());
        return dists;
    };

    const auto ref = sample_distances(x_ref);
    const auto sam = sample_distances(x_sam);
    double total = 0.0;
    for (int i = 0; i < n_pairs; ++i)
        total += std::abs(ref[static_cast<std::size_t>(i)] - sam[static_cast<std::size_t>(i)]);
    return total / static_cast<double>(n_pairs);
}

/// Exact 1D W1 between two empirical measures. Equal sizes reduce to the
/// sorted-sample coupling; unequal sizes integrate |F_a^{-1} - F_b^{-1}| over
/// the merged quantile breakpoints.
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    if (a.size() == b.size()) {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
        return total / static_cast<double>(a.size());
    }

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double u = 0.0, total = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double next_a = static_cast<double>(ia + 1) / na;
        const double next_b = static_cast<double>(ib + 1) / nb;
        const double next = std::min(next_a, next_b);
        total += std::abs(a[ia] - b[ib]) * (next - u);
        u = next;
        if (next_a <= next) ++ia;
        if (next_b <= next) ++ib;
    }
    return total;
}

inline double wasserstein_1d(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return wasserstein_1d(std::vector<double>(a.begin(), a.end()),
                          std::vector<double>(b.begin(), b.end()));
}

// ---- Dataset-level aggregation used by the benchmark harness ----

enum class DivergenceKind { Kl, Js };

/// Per-feature histograms with `bins` equal-width cells over the reference
/// set's range, averaged across features. KL direction is sample || reference.
inline double feature_average_divergence(const Eigen::MatrixXd& reference,
                                         const Eigen::MatrixXd& sample, DivergenceKind kind,
                                         int bins = 20) {
    detail::require_point_sets(reference, sample, "feature_average_divergence");
    double total = 0.0;
    for (Eigen::Index j = 0; j < reference.cols(); ++j) {
        const double lo = reference.col(j).minCoeff();
        const double hi = reference.col(j).maxCoeff();
        const Histogram href = make_histogram(reference.col(j), lo, hi, bins);
        const Histogram hsam = make_histogram(sample.col(j), lo, hi, bins);
        total += kind == DivergenceKind::Kl ? kl_divergence(hsam, href)
                                            : js_divergence(hsam, href);
    }
    return total / static_cast<double>(reference.cols());
}

inline double feature_average_w1(const Eigen::MatrixXd& reference,
                                 const Eigen::MatrixXd& sample) {
    detail::require_point_sets(reference, sample, "feature_average_w1");
    double total = 0.0;
    for (Eigen::Index j = 0; j < reference.cols(); ++j)
        total += wasserstein_1d(Eigen::VectorXd(reference.col(j)),
                                Eigen::VectorXd(sample.col(j)));
    return total / static_cast<double>(reference.cols());
}

/// Uniform row subsample used to bound the O(n^2) kernel sums on large sets.
inline Eigen::MatrixXd cap_rows(const Eigen::MatrixXd& points, int cap, std::uint64_t seed) {
    if (cap < 1) throw std::invalid_argument("cap_rows: cap must be >= 1");
    if (points.rows() <= cap) return points;
    Rng rng = make_rng(seed, "cap");
    auto idx = sample_index_range(static_cast<int>(points.rows()),
                                  static_cast<std::size_t>(cap), rng);
    std::sort(idx.begin(), idx.end());
    Eigen::MatrixXd out(cap, points.cols());
    for (int i = 0; i < cap; ++i) out.row(i) = points.row(idx[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace pcaqs
