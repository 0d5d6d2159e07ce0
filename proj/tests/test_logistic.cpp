#include "pcaqs/logistic.hpp"
#include "pcaqs/rng.hpp"
#include "pcaqs/synth.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace pcaqs;
using Catch::Matchers::WithinAbs;

namespace {

// max-norm gradient check against central finite differences of the loss
double gradient_fd_gap(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const Eigen::VectorXd& w, double b, double l2) {
    const auto [gw, gb] = logistic_gradient(x, y, w, b, l2);
    const double h = 1e-5;
    double worst = 0.0;
    double scale = std::max(1.0, std::abs(gb));
    for (Eigen::Index j = 0; j < w.size(); ++j) scale = std::max(scale, std::abs(gw(j)));

    for (Eigen::Index j = 0; j < w.size(); ++j) {
        Eigen::VectorXd wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        const double fd = (logistic_loss(x, y, wp, b, l2) - logistic_loss(x, y, wm, b, l2)) /
                          (2.0 * h);
        worst = std::max(worst, std::abs(fd - gw(j)));
    }
    const double fd_b =
        (logistic_loss(x, y, w, b + h, l2) - logistic_loss(x, y, w, b - h, l2)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd_b - gb));
    return worst / scale;
}

}  // namespace

TEST_CASE("separable 1D data trains to a perfect ranking") {
    Eigen::MatrixXd x(8, 1);
    x << -4, -3, -2, -1, 1, 2, 3, 4;
    Eigen::VectorXi y(8);
    y << 0, 0, 0, 0, 1, 1, 1, 1;
    const LogisticModel model = train_logistic(x, y, {1e-4, 500, 1e-8});
    const auto auc = auc_score(y, predict_proba(model, x));
    REQUIRE(auc.has_value());
    REQUIRE(*auc == 1.0);
}

TEST_CASE("the zero model predicts one half everywhere") {
    LogisticModel model;
    model.weights = Eigen::VectorXd::Zero(3);
    model.bias = 0.0;
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3, -1, -2, -3;
    const Eigen::VectorXd probs = predict_proba(model, x);
    REQUIRE_THAT(probs(0), WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(probs(1), WithinAbs(0.5, 1e-15));
}

TEST_CASE("large bias saturates near one") {
    LogisticModel model;
    model.weights = Eigen::VectorXd::Zero(1);
    model.bias = 50.0;
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    const double p = predict_proba(model, x)(0);
    REQUIRE(p > 1.0 - 1e-9);
    REQUIRE(p <= 1.0 - 1e-12);  // clamped
}

TEST_CASE("probability is monotone in a positively weighted feature") {
    LogisticModel model;
    model.weights = Eigen::VectorXd::Ones(1);
    model.bias = 0.0;
    Eigen::MatrixXd x(3, 1);
    x << -1.0, 0.0, 2.0;
    const Eigen::VectorXd probs = predict_proba(model, x);
    REQUIRE(probs(0) < probs(1));
    REQUIRE(probs(1) < probs(2));
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng = make_rng(71, "grad-check");
    Eigen::MatrixXd x(40, 3);
    Eigen::VectorXi y(40);
    for (int i = 0; i < 40; ++i) {
        y(i) = i % 3 == 0 ? 1 : 0;
        for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
    }

    Eigen::VectorXd w(3);
    w << 0.3, -0.7, 1.1;
    REQUIRE(gradient_fd_gap(x, y, w, 0.2, 1e-4) < 1e-6);
    REQUIRE(gradient_fd_gap(x, y, Eigen::VectorXd::Zero(3), 0.0, 1e-4) < 1e-6);

    const LogisticModel model = train_logistic(x, y);
    REQUIRE(gradient_fd_gap(x, y, model.weights, model.bias, 1e-4) < 1e-6);
}

TEST_CASE("training loss is nonincreasing in the iteration budget") {
    Rng rng = make_rng(72, "mono-loss");
    Eigen::MatrixXd x(60, 2);
    Eigen::VectorXi y(60);
    for (int i = 0; i < 60; ++i) {
        y(i) = i % 2;
        for (int j = 0; j < 2; ++j) x(i, j) = normal(rng) + (y(i) ? 0.8 : 0.0);
    }
    double last = std::numeric_limits<double>::infinity();
    for (int iters : {1, 2, 5, 10, 50, 200}) {
        const LogisticModel model = train_logistic(x, y, {1e-4, iters, 1e-12});
        REQUIRE(model.final_loss <= last + 1e-12);
        last = model.final_loss;
    }
}

TEST_CASE("single-class labels are rejected") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    Eigen::VectorXi y = Eigen::VectorXi::Zero(4);
    REQUIRE_THROWS(train_logistic(x, y));
    y.setOnes();
    REQUIRE_THROWS(train_logistic(x, y));
}

TEST_CASE("classify applies the threshold rule") {
    Eigen::VectorXd probs(2);
    probs << 0.1, 0.9;
    Eigen::VectorXi out = classify(probs, 0.5);
    REQUIRE(out(0) == 0);
    REQUIRE(out(1) == 1);

    Eigen::VectorXd prior_case(1);
    prior_case << 0.15;
    REQUIRE(classify(prior_case, 0.1)(0) == 1);

    REQUIRE_THROWS(classify(probs, 0.0));
    REQUIRE_THROWS(classify(probs, 1.0));
}

TEST_CASE("all predictions below threshold give zero precision and f1") {
    Eigen::VectorXi y_true(4);
    y_true << 0, 1, 0, 1;
    Eigen::VectorXd probs(4);
    probs << 0.1, 0.2, 0.15, 0.05;
    const Eigen::VectorXi pred = classify(probs, 0.9);
    REQUIRE(pred.sum() == 0);
    const auto report = score(y_true, pred, probs, 0.9);
    REQUIRE(report.f1 == 0.0);
    REQUIRE(report.tpr == 0.0);
    REQUIRE(report.tnr == 1.0);
}

TEST_CASE("auc on the hand-worked ranking case is 0.75") {
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    Eigen::VectorXd probs(4);
    probs << 0.1, 0.4, 0.35, 0.8;
    const auto report_auc = auc_score(y, probs);
    REQUIRE(report_auc.has_value());
    REQUIRE_THAT(*report_auc, WithinAbs(0.75, 1e-12));
}

TEST_CASE("auc extremes and tie midranks") {
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    Eigen::VectorXd perfect(4);
    perfect << 0.1, 0.2, 0.8, 0.9;
    REQUIRE(*auc_score(y, perfect) == 1.0);
    Eigen::VectorXd reversed(4);
    reversed << 0.9, 0.8, 0.2, 0.1;
    REQUIRE(*auc_score(y, reversed) == 0.0);
    Eigen::VectorXd ties = Eigen::VectorXd::Constant(4, 0.5);
    REQUIRE_THAT(*auc_score(y, ties), WithinAbs(0.5, 1e-12));
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng = make_rng(73, "auc-mono");
    Eigen::VectorXi y(50);
    Eigen::VectorXd probs(50);
    for (int i = 0; i < 50; ++i) {
        y(i) = static_cast<int>(rng() & 1);
        probs(i) = uniform01_open(rng);
    }
    const Eigen::VectorXd cubed = probs.array().cube();
    REQUIRE_THAT(*auc_score(y, cubed), WithinAbs(*auc_score(y, probs), 1e-12));
}

TEST_CASE("auc is absent for single-class truth but other metrics hold") {
    Eigen::VectorXi y = Eigen::VectorXi::Zero(3);
    Eigen::VectorXd probs(3);
    probs << 0.2, 0.6, 0.4;
    REQUIRE_FALSE(auc_score(y, probs).has_value());
    const auto report = score(y, classify(probs, 0.5), probs, 0.5);
    REQUIRE_FALSE(report.auc.has_value());
    REQUIRE_THAT(report.accuracy, WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("confusion rates agree with a brute-force oracle") {
    Rng rng = make_rng(74, "confusion");
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 20));
        Eigen::VectorXi y(n), pred(n);
        Eigen::VectorXd probs(n);
        for (int i = 0; i < n; ++i) {
            y(i) = static_cast<int>(rng() & 1);
            pred(i) = static_cast<int>(rng() & 1);
            probs(i) = uniform01_open(rng);
        }
        const auto report = score(y, pred, probs, 0.5);
        long tp = 0, tn = 0, fp = 0, fn = 0;
        for (int i = 0; i < n; ++i) {
            if (y(i) == 1 && pred(i) == 1) ++tp;
            if (y(i) == 0 && pred(i) == 0) ++tn;
            if (y(i) == 0 && pred(i) == 1) ++fp;
            if (y(i) == 1 && pred(i) == 0) ++fn;
        }
        REQUIRE(report.tp == tp);
        REQUIRE(report.tn == tn);
        REQUIRE(report.fp == fp);
        REQUIRE(report.fn == fn);
        if (tp + fn > 0) {
            REQUIRE(report.tpr == static_cast<double>(tp) / (tp + fn));
            REQUIRE_THAT(report.tpr + report.fnr, WithinAbs(1.0, 1e-12));
        }
        if (tn + fp > 0) {
            REQUIRE(report.fpr == static_cast<double>(fp) / (tn + fp));
            REQUIRE_THAT(report.tnr + report.fpr, WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("indistinguishable classes give chance-level AUC") {
    // shift 0, var 1: the two components coincide
    const auto data = gen_gmm_binary(3000, 5, 0.3, 0.0, 1.0, 75, false);
    const LogisticModel model = train_logistic(data.values, *data.labels);
    const auto auc = auc_score(*data.labels, predict_proba(model, data.values));
    REQUIRE(auc.has_value());
    REQUIRE_THAT(*auc, WithinAbs(0.5, 0.05));
}
