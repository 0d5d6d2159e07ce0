#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pcaqs {

struct LogisticModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    int iterations = 0;
    double final_loss = 0.0;
};

struct TrainOptions {
    double l2 = 1e-4;
    int max_iter = 500;
    double tol = 1e-8;  // gradient norm stopping threshold
};

namespace detail {

inline double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace detail

/// L2-regularized mean negative log-likelihood (bias unregularized).
inline double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const Eigen::VectorXd& w, double b, double l2) {
    const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(x.rows(), b);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double sign = y(i) == 1 ? 1.0 : -1.0;
        loss += detail::softplus(-sign * z(i));
    }
    return loss / static_cast<double>(x.rows()) + 0.5 * l2 * w.squaredNorm();
}

/// Gradient of logistic_loss with respect to (w, b).
inline std::pair<Eigen::VectorXd, double> logistic_gradient(const Eigen::MatrixXd& x,
                                                            const Eigen::VectorXi& y,
                                                            const Eigen::VectorXd& w, double b,
                                                            double l2) {
    const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(x.rows(), b);
    Eigen::VectorXd residual(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-z(i)));
        residual(i) = p - (y(i) == 1 ? 1.0 : 0.0);
    }
    const double n = static_cast<double>(x.rows());
    Eigen::VectorXd grad_w = x.transpose() * residual / n + l2 * w;
    const double grad_b = residual.sum() / n;
    return {std::move(grad_w), grad_b};
}

/// Batch gradient descent from zero initialization with Armijo backtracking;
/// the accepted-step loss sequence is nonincreasing by construction.
inline LogisticModel train_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                    const TrainOptions& opts = {}) {
    if (x.rows() != y.size()) throw std::invalid_argument("train_logistic: X/y length mismatch");
    if (x.rows() < 2) throw std::invalid_argument("train_logistic: need >= 2 rows");
    if (!x.allFinite()) throw std::invalid_argument("train_logistic: X contains NaN or Inf");
    const int pos = static_cast<int>((y.array() == 1).count());
    if (pos == 0 || pos == y.size())
        throw std::invalid_argument("train_logistic: y must contain both classes");

    LogisticModel model;
    model.weights = Eigen::VectorXd::Zero(x.cols());
    model.bias = 0.0;
    double loss = logistic_loss(x, y, model.weights, model.bias, opts.l2);

    for (int it = 0; it < opts.max_iter; ++it) {
        auto [gw, gb] = logistic_gradient(x, y, model.weights, model.bias, opts.l2);
        const double gnorm2 = gw.squaredNorm() + gb * gb;
        if (std::sqrt(gnorm2) < opts.tol) break;

        double step = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            const Eigen::VectorXd w_try = model.weights - step * gw;
            const double b_try = model.bias - step * gb;
            const double loss_try = logistic_loss(x, y, w_try, b_try, opts.l2);
            if (loss_try <= loss - 1e-4 * step * gnorm2) {
                model.weights = w_try;
                model.bias = b_try;
                loss = loss_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        model.iterations = it + 1;
        if (!accepted) break;  // step underflow; gradient is numerically flat
    }
    model.final_loss = loss;
    return model;
}

/// sigmoid(Xw + b), clamped away from {0,1} for downstream logs.
inline Eigen::VectorXd predict_proba(const LogisticModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.weights.size())
        throw std::invalid_argument("predict_proba: feature width mismatch");
    Eigen::VectorXd probs = x * model.weights + Eigen::VectorXd::Constant(x.rows(), model.bias);
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-probs(i)));
        probs(i) = std::clamp(p, 1e-12, 1.0 - 1e-12);
    }
    return probs;
}

inline Eigen::VectorXi classify(const Eigen::VectorXd& probs, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("classify: threshold must lie in (0,1)");
    Eigen::VectorXi labels(probs.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i) labels(i) = probs(i) >= threshold ? 1 : 0;
    return labels;
}

/// Rank (Mann-Whitney) AUC with midranks for ties; absent when y_true has a
/// single class.
inline std::optional<double> auc_score(const Eigen::VectorXi& y_true,
                                       const Eigen::VectorXd& probs) {
    if (y_true.size() != probs.size()) throw std::invalid_argument("auc_score: length mismatch");
    const Eigen::Index n = y_true.size();
    const auto n_pos = static_cast<double>((y_true.array() == 1).count());
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return probs(a) < probs(b); });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && probs(order[j + 1]) == probs(order[i])) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t)
            if (y_true(order[t]) == 1) rank_sum_pos += midrank;
        i = j + 1;
    }
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

struct ClassificationReport {
    double accuracy = 0.0;
    std::optional<double> auc;
    double f1 = 0.0;
    double tpr = 0.0, tnr = 0.0, fpr = 0.0, fnr = 0.0;
    double threshold = 0.5;
    long tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Exact-count confusion metrics. Rates with an empty denominator report 0;
/// precision uses the max(denominator, 1) guard so zero positive predictions
/// yield precision 0 rather than a division by zero.
inline ClassificationReport score(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred,
                                  const Eigen::VectorXd& probs, double threshold) {
    if (y_true.size() != y_pred.size() || y_true.size() != probs.size())
        throw std::invalid_argument("score: length mismatch");
    if (y_true.size() == 0) throw std::invalid_argument("score: empty input");

    ClassificationReport r;
    r.threshold = threshold;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        if (y_true(i) == 1)
            y_pred(i) == 1 ? ++r.tp : ++r.fn;
        else
            y_pred(i) == 1 ? ++r.fp : ++r.tn;
    }
    const double n = static_cast<double>(y_true.size());
    r.accuracy = static_cast<double>(r.tp + r.tn) / n;
    r.tpr = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    r.fnr = r.tp + r.fn > 0 ? static_cast<double>(r.fn) / static_cast<double>(r.tp + r.fn) : 0.0;
    r.tnr = r.tn + r.fp > 0 ? static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp) : 0.0;
    r.fpr = r.tn + r.fp > 0 ? static_cast<double>(r.fp) / static_cast<double>(r.tn + r.fp) : 0.0;
    const double precision =
        static_cast<double>(r.tp) / std::max<double>(static_cast<double>(r.tp + r.fp), 1.0);
    const double recall = r.tpr;
    r.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    r.auc = auc_score(y_true, probs);
    return r;
}

}  // namespace pcaqs
