#pragma once

#include "pcaqs/data.hpp"
#include "pcaqs/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

enum class Family { BlockGaussian, GmmBinary, StructuredClassification };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::BlockGaussian: return "block_gaussian";
        case Family::GmmBinary: return "gmm_binary";
        case Family::StructuredClassification: return "structured_classification";
    }
    return "unknown";
}

inline Family parse_family(const std::string& name) {
    if (name == "block_gaussian") return Family::BlockGaussian;
    if (name == "gmm_binary") return Family::GmmBinary;
    if (name == "structured_classification") return Family::StructuredClassification;
    throw std::invalid_argument("unknown generator family '" + name + "'");
}

struct GeneratorSpec {
    Family family = Family::BlockGaussian;
    int n = 20000;
    int d = 20;
    std::uint64_t seed = 42;
    // block_gaussian
    int block_size = 5;
    double rho = 0.7;
    // gmm_binary
    double prior1 = 0.1;
    double shift = 0.5;
    double var1 = 1.2;
    bool nonlinear = false;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["family"] = family_name(family);
        j["n"] = n;
        j["d"] = d;
        j["seed"] = seed;
        if (family == Family::BlockGaussian) {
            j["block_size"] = block_size;
            j["rho"] = rho;
        } else if (family == Family::GmmBinary) {
            j["prior1"] = prior1;
            j["shift"] = shift;
            j["var1"] = var1;
            j["nonlinear"] = nonlinear;
        }
        return j;
    }
};

/// Zero-mean Gaussian rows with block-diagonal covariance: unit diagonal,
/// within-block off-diagonals rho. A trailing partial block gets the leading
/// submatrix of the same pattern.
inline DataMatrix gen_block_gaussian(int n, int d, int block_size, double rho,
                                     std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_block_gaussian: n must be >= 2");
    if (block_size < 1 || block_size > d)
        throw std::invalid_argument("gen_block_gaussian: block_size must lie in [1, d]");
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("gen_block_gaussian: |rho| must be < 1");
    if (block_size >= 2 && rho <= -1.0 / static_cast<double>(block_size - 1))
        throw std::invalid_argument(
            "gen_block_gaussian: rho <= -1/(block_size-1) is not positive definite");

    // One Cholesky factor per distinct block width.
    const auto chol_for = [&](int width) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(width, width, rho);
        cov.diagonal().setOnes();
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("gen_block_gaussian: block covariance not positive definite");
        return Eigen::MatrixXd(llt.matrixL());
    };
    const Eigen::MatrixXd full_l = chol_for(block_size);
    const int tail = d % block_size;
    const Eigen::MatrixXd tail_l = tail ? chol_for(tail) : Eigen::MatrixXd();

    Rng rng = make_rng(seed, "block_gaussian");
    DataMatrix out;
    out.values.resize(n, d);
    Eigen::VectorXd z(block_size);
    for (int i = 0; i < n; ++i) {
        for (int start = 0; start < d; start += block_size) {
            const int width = std::min(block_size, d - start);
            for (int j = 0; j < width; ++j) z(j) = normal(rng);
            const Eigen::MatrixXd& l = width == block_size ? full_l : tail_l;
            out.values.row(i).segment(start, width) = (l * z.head(width)).transpose();
        }
    }
    out.feature_names.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) out.feature_names.push_back("x" + std::to_string(j));
    return out;
}

/// Two-class Gaussian mixture: class 0 ~ N(0, I), class 1 ~ N(shift*1,
/// var1*I), labels Bernoulli(prior1) per row. With nonlinear set, appends all
/// pairwise products x_i x_j (i < j) and the d sine transforms sin(x_i).
inline DataMatrix gen_gmm_binary(int n, int d, double prior1, double shift, double var1,
                                 std::uint64_t seed, bool nonlinear) {
    if (n < 2) throw std::invalid_argument("gen_gmm_binary: n must be >= 2");
    if (d < 1) throw std::invalid_argument("gen_gmm_binary: d must be >= 1");
    if (!(prior1 > 0.0 && prior1 < 1.0))
        throw std::invalid_argument("gen_gmm_binary: prior1 must lie in (0,1)");
    if (!(var1 > 0.0)) throw std::invalid_argument("gen_gmm_binary: var1 must be > 0");

    Rng rng = make_rng(seed, "gmm_binary");
    const double sd1 = std::sqrt(var1);
    Eigen::MatrixXd base(n, d);
    Eigen::VectorXi labels(n);
    for (int i = 0; i < n; ++i) {
        const int y = uniform01(rng) < prior1 ? 1 : 0;
        labels(i) = y;
        for (int j = 0; j < d; ++j) {
            const double z = normal(rng);
            base(i, j) = y == 1 ? shift + sd1 * z : z;
        }
    }

    DataMatrix out;
    out.labels = labels;
    for (int j = 0; j < d; ++j) out.feature_names.push_back("x" + std::to_string(j));
    if (!nonlinear) {
        out.values = std::move(base);
        return out;
    }

    const int n_inter = d * (d - 1) / 2;
    out.values.resize(n, d + n_inter + d);
    out.values.leftCols(d) = base;
    int col = d;
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            out.values.col(col++) = base.col(a).cwiseProduct(base.col(b));
            out.feature_names.push_back("x" + std::to_string(a) + "*x" + std::to_string(b));
        }
    }
    for (int j = 0; j < d; ++j) {
        out.values.col(col++) = base.col(j).array().sin();
        out.feature_names.push_back("sin_x" + std::to_string(j));
    }
    return out;
}

/// 30-feature binary classification data: 20 informative columns with class
/// centroids ||mu_1 - mu_0|| = 1.5 sqrt(20) apart (all-ones direction) and
/// identity covariance, 5 redundant random linear combinations of the
/// informative block, 2 exact repeats of the first two informative columns,
/// 3 pure noise columns, labels Bernoulli(0.1). Returned raw; the pipeline
/// standardizes before sampling. The metadata echoes the mixing weights.
inline DataMatrix gen_structured_classification(int n, std::uint64_t seed,
                                                nlohmann::json* metadata = nullptr) {
    if (n < 10) throw std::invalid_argument("gen_structured_classification: n must be >= 10");
    constexpr int kInformative = 20;
    constexpr int kRedundant = 5;
    constexpr int kRepeated = 2;
    constexpr int kNoise = 3;
    constexpr double kPrior1 = 0.1;
    constexpr double kShift = 1.5;  // per-coordinate, so the centroid gap is 1.5*sqrt(20)

    Rng rng = make_rng(seed, "structured_classification");
    Eigen::MatrixXd mix(kRedundant, kInformative);
    for (int r = 0; r < kRedundant; ++r)
        for (int c = 0; c < kInformative; ++c) mix(r, c) = normal(rng);

    DataMatrix out;
    out.values.resize(n, kInformative + kRedundant + kRepeated + kNoise);
    Eigen::VectorXi labels(n);
    for (int i = 0; i < n; ++i) {
        const int y = uniform01(rng) < kPrior1 ? 1 : 0;
        labels(i) = y;
        for (int j = 0; j < kInformative; ++j)
            out.values(i, j) = (y == 1 ? kShift : 0.0) + normal(rng);
        for (int j = 0; j < kNoise; ++j)
            out.values(i, kInformative + kRedundant + kRepeated + j) = normal(rng);
    }
    out.values.middleCols(kInformative, kRedundant) =
        out.values.leftCols(kInformative) * mix.transpose();
    out.values.col(kInformative + kRedundant) = out.values.col(0);
    out.values.col(kInformative + kRedundant + 1) = out.values.col(1);
    out.labels = labels;

    for (int j = 0; j < kInformative; ++j) out.feature_names.push_back("inf_" + std::to_string(j));
    for (int j = 0; j < kRedundant; ++j) out.feature_names.push_back("red_" + std::to_string(j));
    for (int j = 0; j < kRepeated; ++j) out.feature_names.push_back("rep_" + std::to_string(j));
    for (int j = 0; j < kNoise; ++j) out.feature_names.push_back("noise_" + std::to_string(j));

    if (metadata) {
        std::vector<std::vector<double>> weights(kRedundant);
        for (int r = 0; r < kRedundant; ++r)
            weights[static_cast<std::size_t>(r)].assign(mix.row(r).begin(), mix.row(r).end());
        (*metadata)["redundant_mixing_weights"] = weights;
        (*metadata)["informative_shift"] = kShift;
        (*metadata)["prior1"] = kPrior1;
    }
    return out;
}

struct GeneratedData {
    DataMatrix data;
    nlohmann::json metadata;
};

inline GeneratedData generate(const GeneratorSpec& spec) {
    GeneratedData out;
    out.metadata = spec.to_json();
    switch (spec.family) {
        case Family::BlockGaussian:
            out.data = gen_block_gaussian(spec.n, spec.d, spec.block_size, spec.rho, spec.seed);
            break;
        case Family::GmmBinary:
            out.data = gen_gmm_binary(spec.n, spec.d, spec.prior1, spec.shift, spec.var1,
                                      spec.seed, spec.nonlinear);
            break;
        case Family::StructuredClassification:
            out.data = gen_structured_classification(spec.n, spec.seed, &out.metadata);
            break;
    }
    return out;
}

}  // namespace pcaqs
