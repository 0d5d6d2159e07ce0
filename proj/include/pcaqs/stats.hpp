#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pcaqs {

inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (denominator n-1); 0 by convention when n == 1.
inline double sample_std(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("sample_std: empty sample");
    if (xs.size() == 1) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double median_of(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median_of: empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Two-sided Welch two-sample t-test with Welch-Satterthwaite degrees of
/// freedom. Equal means (including degenerate zero-variance samples) give
/// t = 0, p = 1; zero pooled variance with unequal means gives p = 0.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_t_test: both samples need >= 2 values");

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = sample_std(a) * sample_std(a);
    const double vb = sample_std(b) * sample_std(b);

    WelchResult r;
    const double se2 = va / na + vb / nb;
    if (ma == mb) {
        r.t = 0.0;
        r.df = na + nb - 2.0;
        r.p_value = 1.0;
        return r;
    }
    if (se2 <= 0.0) {
        r.t = std::numeric_limits<double>::infinity() * (ma > mb ? 1.0 : -1.0);
        r.df = na + nb - 2.0;
        r.p_value = 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 /
           ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    const boost::math::students_t_distribution<double> dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
    return r;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fit_line: need matching samples of size >= 3");
    const double n = static_cast<double>(x.size());
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate x values");

    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += e * e;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return f;
}

/// Least-squares line through (log x, log y); inputs must be positive.
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_loglog: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

}  // namespace pcaqs
