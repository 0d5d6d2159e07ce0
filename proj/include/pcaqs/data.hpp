#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcaqs {

/// Row-major numeric table: n samples by d features, optional {0,1} labels.
struct DataMatrix {
    Eigen::MatrixXd values;
    std::optional<Eigen::VectorXi> labels;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index d() const { return values.cols(); }
};

inline void validate_data(const DataMatrix& data) {
    if (data.n() < 1 || data.d() < 1)
        throw std::invalid_argument("DataMatrix: need n >= 1 and d >= 1");
    if (!data.values.allFinite())
        throw std::invalid_argument("DataMatrix: values contain NaN or Inf");
    if (data.labels) {
        if (data.labels->size() != data.n())
            throw std::invalid_argument("DataMatrix: labels length != n");
        for (Eigen::Index i = 0; i < data.labels->size(); ++i) {
            const int y = (*data.labels)(i);
            if (y != 0 && y != 1)
                throw std::invalid_argument("DataMatrix: label at row " + std::to_string(i) +
                                            " is " + std::to_string(y) + ", expected 0 or 1");
        }
    }
    if (!data.feature_names.empty() &&
        static_cast<Eigen::Index>(data.feature_names.size()) != data.d())
        throw std::invalid_argument("DataMatrix: feature_names length != d");
}

/// Per-feature affine transform fitted on training rows; reapplies the exact
/// same shift/scale to held-out rows.
struct Scaler {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        if (x.cols() != means.size())
            throw std::invalid_argument("Scaler::apply: column count mismatch");
        return (x.rowwise() - means.transpose()).array().rowwise() /
               stds.transpose().array();
    }

    Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const {
        if (x.cols() != means.size())
            throw std::invalid_argument("Scaler::invert: column count mismatch");
        return (x.array().rowwise() * stds.transpose().array()).matrix().rowwise() +
               means.transpose();
    }
};

/// Center to zero mean and scale to unit sample std (denominator n-1).
/// Constant columns are rejected unless allow_constant, which forces std=1.
inline std::pair<DataMatrix, Scaler> standardize(const DataMatrix& data,
                                                 bool allow_constant = false) {
    const Eigen::Index n = data.n();
    if (n < 2) throw std::invalid_argument("standardize: need n >= 2");

    Scaler scaler;
    scaler.means = data.values.colwise().mean();
    Eigen::MatrixXd centered = data.values.rowwise() - scaler.means.transpose();
    scaler.stds =
        (centered.array().square().colwise().sum() / static_cast<double>(n - 1))
            .sqrt()
            .matrix()
            .transpose();

    for (Eigen::Index j = 0; j < scaler.stds.size(); ++j) {
        if (scaler.stds(j) <= 0.0) {
            if (!allow_constant)
                throw std::invalid_argument(
                    "standardize: column " + std::to_string(j) +
                    (data.feature_names.empty() ? std::string()
                                                : " ('" + data.feature_names[static_cast<std::size_t>(j)] + "')") +
                    " is constant (std = 0); pass allow_constant to force std = 1");
            scaler.stds(j) = 1.0;
        }
    }

    DataMatrix out;
    out.values = centered.array().rowwise() / scaler.stds.transpose().array();
    out.labels = data.labels;
    out.feature_names = data.feature_names;
    return {std::move(out), std::move(scaler)};
}

}  // namespace pcaqs
