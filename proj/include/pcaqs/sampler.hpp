#pragma once

#include "pcaqs/quantile.hpp"
#include "pcaqs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaqs {

enum class SampleMethod { PcaQs, Srs };

inline const char* method_name(SampleMethod m) {
    return m == SampleMethod::PcaQs ? "PCA-QS" : "SRS";
}

/// Per-group retained count: min(ceil(delta * N_g), N_g). The small epsilon
/// absorbs binary representation error of decimal rates, so e.g.
/// 0.05 * 400 counts as exactly 20 rather than rounding up to 21.
inline std::int64_t group_retention(std::int64_t n_g, double delta) {
    if (n_g < 0) throw std::invalid_argument("group_retention: N_g must be >= 0");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("group_retention: delta must lie in (0,1]");
    if (n_g == 0) return 0;
    const double target = delta * static_cast<double>(n_g);
    const auto ceiled = static_cast<std::int64_t>(std::ceil(target - 1e-8));
    return std::min<std::int64_t>(std::max<std::int64_t>(ceiled, 1), n_g);
}

struct SamplePlan {
    SampleMethod method = SampleMethod::Srs;
    std::vector<int> retained;  // sorted, unique
    double delta = 0.0;
    std::map<std::string, std::int64_t> per_group_counts;  // PCA-QS only
    std::uint64_t seed = 0;
};

/// Stratified draw: an independent uniform without-replacement draw of
/// group_retention(N_g, delta) rows inside every composite group. Each group
/// samples from its own seed stream keyed by the group key, so iteration
/// order cannot change results.
inline SamplePlan pcaqs_sample(const GroupAssignment& assignment, double delta,
                               std::uint64_t seed) {
    SamplePlan plan;
    plan.method = SampleMethod::PcaQs;
    plan.delta = delta;
    plan.seed = seed;
    for (const auto& [key, rows] : assignment.group_index) {
        const auto count = group_retention(static_cast<std::int64_t>(rows.size()), delta);
        plan.per_group_counts[key] = count;
        Rng rng = make_rng(seed, key);
        auto drawn = sample_without_replacement(rows, static_cast<std::size_t>(count), rng);
        plan.retained.insert(plan.retained.end(), drawn.begin(), drawn.end());
    }
    std::sort(plan.retained.begin(), plan.retained.end());
    return plan;
}

/// Uniform without-replacement baseline of an exact size.
inline SamplePlan srs_sample(int n, std::int64_t size, std::uint64_t seed) {
    if (size < 0 || size > n)
        throw std::invalid_argument("srs_sample: size must lie in [0, n]");
    SamplePlan plan;
    plan.method = SampleMethod::Srs;
    plan.delta = n > 0 ? static_cast<double>(size) / static_cast<double>(n) : 0.0;
    plan.seed = seed;
    Rng rng = make_rng(seed, "srs");
    plan.retained = sample_index_range(n, static_cast<std::size_t>(size), rng);
    std::sort(plan.retained.begin(), plan.retained.end());
    return plan;
}

inline SamplePlan srs_sample_rate(int n, double delta, std::uint64_t seed) {
    auto plan = srs_sample(n, group_retention(n, delta), seed);
    plan.delta = delta;
    return plan;
}

/// Optional exact-size trim: per-group ceilings can overshoot a requested
/// absolute size; this drops uniformly at random down to `target`. Plans at
/// or under the target are returned unchanged (the achieved size is the
/// honest answer; rows are never invented).
inline SamplePlan trim_to_size(const SamplePlan& plan, std::int64_t target,
                               std::uint64_t seed) {
    if (target < 0) throw std::invalid_argument("trim_to_size: target must be >= 0");
    if (static_cast<std::int64_t>(plan.retained.size()) <= target) return plan;
    SamplePlan out = plan;
    Rng rng = make_rng(seed, "trim");
    out.retained =
        sample_without_replacement(plan.retained, static_cast<std::size_t>(target), rng);
    std::sort(out.retained.begin(), out.retained.end());
    return out;
}

inline void write_indices_csv(const SamplePlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_indices_csv: cannot open '" + path + "'");
    out << "row_index\n";
    for (int idx : plan.retained) out << idx << '\n';
    if (!out) throw std::runtime_error("write_indices_csv: write failed");
}

}  // namespace pcaqs
