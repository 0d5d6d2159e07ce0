#pragma once

#include "pcaqs/config.hpp"
#include "pcaqs/data.hpp"
#include "pcaqs/logistic.hpp"
#include "pcaqs/metrics.hpp"
#include "pcaqs/pca.hpp"
#include "pcaqs/quantile.hpp"
#include "pcaqs/rng.hpp"
#include "pcaqs/sampler.hpp"
#include "pcaqs/stats.hpp"
#include "pcaqs/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

namespace pcaqs {

struct RunRecord {
    int replicate = 0;
    std::string method;
    std::string pc_config;  // "fixed=K", "dyn=K" (resolved), or "-" for SRS
    double delta = 0.0;
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
};

struct AggregateRow {
    std::string method;
    std::string pc_config;
    double delta = 0.0;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
    std::optional<double> p_value;  // PCA-QS rows, vs the matching SRS group
};

/// Benchmark input: either a synthetic family regenerated per replicate or a
/// fixed table (re)sampled per replicate.
struct DataSource {
    std::variant<GeneratorSpec, DataMatrix> source;
    std::string name;

    static DataSource from_generator(const GeneratorSpec& spec) {
        return {spec, std::string("gen:") + family_name(spec.family)};
    }
    static DataSource from_data(DataMatrix data, std::string dataset_name) {
        return {std::move(data), std::move(dataset_name)};
    }
};

struct BenchResult {
    std::string dataset;
    std::vector<RunRecord> records;
    int replications = 0;
    int failed = 0;
    std::vector<std::string> warnings;
    int metric_point_cap = 2000;  // energy/MMD per-side subsample bound
};

/// SRS baseline sizing. SizeMatched draws exactly |retained_PCA-QS| rows so
/// the comparison is fair under per-group ceiling overshoot; RateMatched
/// draws ceil(delta * n) rows, reproducing the published protocol where both
/// methods share the retention rate.
enum class SrsBaseline { SizeMatched, RateMatched };

namespace detail {

inline DataMatrix subset_rows(const DataMatrix& data, const std::vector<int>& rows) {
    DataMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), data.d());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.values.row(static_cast<Eigen::Index>(i)) = data.values.row(rows[i]);
    if (data.labels) {
        Eigen::VectorXi labels(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            labels(static_cast<Eigen::Index>(i)) = (*data.labels)(rows[i]);
        out.labels = labels;
    }
    out.feature_names = data.feature_names;
    return out;
}

inline std::vector<int> complement_indices(int n, const std::vector<int>& sorted_subset) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n) - sorted_subset.size());
    std::size_t p = 0;
    for (int i = 0; i < n; ++i) {
        if (p < sorted_subset.size() && sorted_subset[p] == i)
            ++p;
        else
            out.push_back(i);
    }
    return out;
}

struct ReplicateOutput {
    std::vector<RunRecord> records;
    std::vector<std::string> warnings;
    std::optional<std::string> failure;
};

inline void append_metric_records(std::vector<RunRecord>& records, int replicate,
                                  const std::string& method, const std::string& pc_config,
                                  double delta,
                                  const std::vector<std::string>& metric_names,
                                  const Eigen::MatrixXd& reference, const Eigen::MatrixXd& sample,
                                  int cap, std::uint64_t rep_seed) {
    const bool need_cap =
        std::find(metric_names.begin(), metric_names.end(), "energy") != metric_names.end() ||
        std::find(metric_names.begin(), metric_names.end(), "mmd") != metric_names.end();
    Eigen::MatrixXd ref_cap, sam_cap;
    if (need_cap) {
        ref_cap = cap_rows(reference, cap, mix_seed(rep_seed, "cap-ref"));
        sam_cap = cap_rows(sample, cap, mix_seed(rep_seed, "cap-sam"));
    }

    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    if (std::find(metric_names.begin(), metric_names.end(), "mahalanobis") !=
        metric_names.end()) {
        mu = reference.colwise().mean();
        const Eigen::MatrixXd centered = reference.rowwise() - mu.transpose();
        sigma = centered.transpose() * centered / static_cast<double>(reference.rows() - 1);
    }

    for (const auto& name : metric_names) {
        double value = 0.0;
        if (name == "js")
            value = feature_average_divergence(reference, sample, DivergenceKind::Js);
        else if (name == "kl")
            value = feature_average_divergence(reference, sample, DivergenceKind::Kl);
        else if (name == "energy")
            value = energy_distance(ref_cap, sam_cap);
        else if (name == "mmd")
            value = mmd_rbf(ref_cap, sam_cap);
        else if (name == "mahalanobis")
            value = mahalanobis_score(sample, mu, sigma);
        else if (name == "pairwise_dd")
            value = pairwise_distance_difference(reference, sample, 10000,
                                                 mix_seed(rep_seed, "pdd"));
        else if (name == "w1")
            value = feature_average_w1(reference, sample);
        else
            throw std::invalid_argument("run_benchmark: unknown metric '" + name + "'");
        records.push_back({replicate, method, pc_config, delta, name, value, rep_seed});
    }
}

inline void append_classification_records(std::vector<RunRecord>& records, int replicate,
                                          const std::string& method,
                                          const std::string& pc_config, double delta,
                                          std::uint64_t seed, const Eigen::MatrixXd& train_x,
                                          const Eigen::VectorXi& train_y,
                                          const Eigen::MatrixXd& test_x,
                                          const Eigen::VectorXi& test_y) {
    const LogisticModel model = train_logistic(train_x, train_y);
    const double threshold =
        static_cast<double>((train_y.array() == 1).count()) / static_cast<double>(train_y.size());
    const Eigen::VectorXd probs = predict_proba(model, test_x);
    const Eigen::VectorXi pred = classify(probs, threshold);
    const ClassificationReport report = score(test_y, pred, probs, threshold);

    const auto push = [&](const char* name, double value) {
        records.push_back({replicate, method, pc_config, delta, name, value, seed});
    };
    push("accuracy", report.accuracy);
    if (report.auc) push("auc", *report.auc);
    push("f1", report.f1);
    push("tpr", report.tpr);
    push("tnr", report.tnr);
    push("fpr", report.fpr);
    push("fnr", report.fnr);
    push("threshold", report.threshold);
}

inline ReplicateOutput run_replicate(const RunConfig& config, const DataSource& source,
                                     int replicate, SrsBaseline baseline) {
    ReplicateOutput out;
    const std::uint64_t rep_seed = config.seed + static_cast<std::uint64_t>(replicate);
    try {
        DataMatrix generated;
        const DataMatrix* data = nullptr;
        if (std::holds_alternative<GeneratorSpec>(source.source)) {
            GeneratorSpec spec = std::get<GeneratorSpec>(source.source);
            spec.seed = rep_seed;
            generated = generate(spec).data;
            data = &generated;
        } else {
            data = &std::get<DataMatrix>(source.source);
        }

        const int n = static_cast<int>(data->n());
        if (config.test_size >= n)
            throw std::runtime_error("test_size must be smaller than the dataset");

        std::vector<int> train_rows;
        std::vector<int> test_rows;
        if (config.test_size > 0) {
            Rng rng = make_rng(rep_seed, "test-split");
            test_rows = sample_index_range(n, static_cast<std::size_t>(config.test_size), rng);
            std::sort(test_rows.begin(), test_rows.end());
            train_rows = complement_indices(n, test_rows);
        } else {
            train_rows.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) train_rows[static_cast<std::size_t>(i)] = i;
        }

        const DataMatrix train_raw = subset_rows(*data, train_rows);
        auto [train, scaler] = standardize(train_raw);
        const int n_train = static_cast<int>(train.n());

        const int k_max = static_cast<int>(std::min<Eigen::Index>(train.n() - 1, train.d()));
        const PcaModel model = fit_pca(train.values, k_max);

        int k = 0;
        bool threshold_unmet = false;
        if (config.k_mode == KMode::Fixed) {
            if (config.k > static_cast<int>(model.k()))
                throw std::runtime_error("fixed k=" + std::to_string(config.k) +
                                         " exceeds usable rank " + std::to_string(model.k()));
            k = config.k;
        } else {
            const auto sel = select_k_variance(model.full_ratios(), config.variance_threshold,
                                               variance_cap(train.d()));
            k = sel.k;
            threshold_unmet = sel.threshold_unmet;
        }
        const std::string pc_config =
            (config.k_mode == KMode::Fixed ? "fixed=" : "dyn=") + std::to_string(k);
        if (threshold_unmet)
            out.warnings.push_back("variance threshold unreachable within cap; using k=" +
                                   std::to_string(k));

        const Eigen::MatrixXd scores = train.values * model.components.topRows(k).transpose();
        const int m = config.resolved_m(k);
        const QuantileGrid grid = build_grid(scores, m);
        if (grid.sparse_for(n_train))
            out.warnings.push_back("m^k exceeds the training size; most composite groups will be singletons");

        const GroupAssignment assignment = composite_keys(bin_matrix(scores, grid));
        const SamplePlan plan_qs =
            pcaqs_sample(assignment, config.delta, mix_seed(rep_seed, "pcaqs"));
        const SamplePlan plan_srs =
            baseline == SrsBaseline::SizeMatched
                ? srs_sample(n_train, static_cast<std::int64_t>(plan_qs.retained.size()),
                             mix_seed(rep_seed, "srs"))
                : srs_sample_rate(n_train, config.delta, mix_seed(rep_seed, "srs"));

        const DataMatrix sample_qs = subset_rows(train, plan_qs.retained);
        const DataMatrix sample_srs = subset_rows(train, plan_srs.retained);

        append_metric_records(out.records, replicate, "PCA-QS", pc_config, config.delta,
                              config.metrics, train.values, sample_qs.values, 2000, rep_seed);
        append_metric_records(out.records, replicate, "SRS", "-", config.delta,
                              config.metrics, train.values, sample_srs.values, 2000, rep_seed);

        if (config.test_size > 0 && data->labels) {
            const DataMatrix test_raw = subset_rows(*data, test_rows);
            const Eigen::MatrixXd test_x = scaler.apply(test_raw.values);
            const auto classify_method = [&](const DataMatrix& sample, const char* method,
                                             const std::string& pc) {
                const int pos = static_cast<int>((sample.labels->array() == 1).count());
                if (pos == 0 || pos == sample.labels->size()) {
                    out.warnings.push_back(std::string(method) + " subset at replicate " +
                                           std::to_string(replicate) +
                                           " is single-class; classification skipped");
                    return;
                }
                append_classification_records(out.records, replicate, method, pc, config.delta,
                                              rep_seed, sample.values, *sample.labels, test_x,
                                              *test_raw.labels);
            };
            classify_method(sample_qs, "PCA-QS", pc_config);
            classify_method(sample_srs, "SRS", "-");
        }
    } catch (const std::exception& e) {
        out.failure = e.what();
    }
    return out;
}

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

/// Replicated PCA-QS vs SRS comparison. Replicate r reseeds with seed + r,
/// regenerates or resamples, fits PCA on training rows only, draws plans for
/// both methods and evaluates the configured metric set (plus classification
/// scores when test_size > 0 and labels exist). Replicates run concurrently;
/// output order is by replicate index.
inline BenchResult run_benchmark(const RunConfig& config, const DataSource& source,
                                 SrsBaseline baseline = SrsBaseline::SizeMatched) {
    BenchResult result;
    result.dataset = source.name;
    result.replications = config.replications;

    std::vector<detail::ReplicateOutput> outputs(
        static_cast<std::size_t>(config.replications));
    std::atomic<int> next{0};
    const unsigned n_threads = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                                     static_cast<unsigned>(config.replications)));
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (int r = next.fetch_add(1); r < config.replications; r = next.fetch_add(1))
                outputs[static_cast<std::size_t>(r)] =
                    detail::run_replicate(config, source, r, baseline);
        });
    }
    for (auto& w : workers) w.join();

    std::set<std::string> seen_warnings;
    for (int r = 0; r < config.replications; ++r) {
        auto& rep = outputs[static_cast<std::size_t>(r)];
        if (rep.failure) {
            ++result.failed;
            result.warnings.push_back("replicate " + std::to_string(r) +
                                      " failed: " + *rep.failure);
            continue;
        }
        for (auto& w : rep.warnings)
            if (seen_warnings.insert(w).second) result.warnings.push_back(w);
        result.records.insert(result.records.end(), rep.records.begin(), rep.records.end());
    }
    if (result.records.empty())
        throw std::runtime_error("run_benchmark: zero successful replicates");
    return result;
}

/// Per-(method, pc_config, delta, metric) mean, sample std and count, with a
/// Welch p-value attached to each PCA-QS group against the SRS group of the
/// same delta and metric.
inline std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");

    using Key = std::tuple<std::string, std::string, double, std::string>;
    std::map<Key, std::vector<double>> groups;
    for (const auto& rec : records)
        groups[{rec.method, rec.pc_config, rec.delta, rec.metric}].push_back(rec.value);

    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, values] : groups) {
        AggregateRow row;
        row.method = std::get<0>(key);
        row.pc_config = std::get<1>(key);
        row.delta = std::get<2>(key);
        row.metric = std::get<3>(key);
        row.mean = mean_of(values);
        row.stddev = sample_std(values);
        row.count = static_cast<int>(values.size());
        if (row.method == "PCA-QS") {
            const auto srs = groups.find({"SRS", "-", row.delta, row.metric});
            if (srs != groups.end() && values.size() >= 2 && srs->second.size() >= 2)
                row.p_value = welch_t_test(values, srs->second).p_value;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

enum class StudyKind { NormalQuantile, KlDecay, W1Decay };

inline const char* study_name(StudyKind kind) {
    switch (kind) {
        case StudyKind::NormalQuantile: return "normal_quantile";
        case StudyKind::KlDecay: return "kl_decay";
        case StudyKind::W1Decay: return "w1_decay";
    }
    return "unknown";
}

inline StudyKind parse_study(const std::string& name) {
    if (name == "normal_quantile") return StudyKind::NormalQuantile;
    if (name == "kl_decay") return StudyKind::KlDecay;
    if (name == "w1_decay") return StudyKind::W1Decay;
    throw std::invalid_argument("unknown convergence study '" + name + "'");
}

struct ConvergencePoint {
    int n = 0;
    double mean_error = 0.0;
    double median_error = 0.0;
    int reps_used = 0;
};

struct ConvergenceResult {
    StudyKind kind = StudyKind::NormalQuantile;
    std::vector<ConvergencePoint> points;
    LineFit fit;  // least squares on (log n, log mean_error)
    int dropped = 0;
};

/// Decay-rate study: per grid point, average the target error over `reps`
/// replicates and fit a log-log line. Exact-zero errors cannot enter the log
/// fit; such replicates are dropped and counted.
inline ConvergenceResult convergence_study(StudyKind kind, const std::vector<int>& n_grid,
                                           int reps, std::uint64_t seed) {
    if (n_grid.size() < 4)
        throw std::invalid_argument("convergence_study: need >= 4 grid points");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
        if (n_grid[i] >= n_grid[i + 1])
            throw std::invalid_argument("convergence_study: n_grid must be strictly increasing");
    if (reps < 20) throw std::invalid_argument("convergence_study: need reps >= 20");

    // Fixed large reference standing in for the true N(0,1) distribution.
    std::vector<double> reference;
    Histogram ref_hist;
    if (kind != StudyKind::NormalQuantile) {
        constexpr int kReferenceSize = 1000000;
        reference.resize(kReferenceSize);
        Rng rng = make_rng(seed, "reference");
        for (auto& v : reference) v = normal(rng);
        std::sort(reference.begin(), reference.end());
        if (kind == StudyKind::KlDecay) {
            Eigen::VectorXd ref_vec =
                Eigen::Map<const Eigen::VectorXd>(reference.data(), kReferenceSize);
            ref_hist = make_histogram(ref_vec, reference.front(), reference.back(), 20);
        }
    }

    ConvergenceResult result;
    result.kind = kind;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
        const int n = n_grid[gi];
        std::vector<double> errors;
        errors.reserve(static_cast<std::size_t>(reps));
        for (int rep = 0; rep < reps; ++rep) {
            Rng rng = make_rng(seed, std::string(study_name(kind)) + "-" + std::to_string(n) +
                                         "-" + std::to_string(rep));
            std::vector<double> sample(static_cast<std::size_t>(n));
            for (auto& v : sample) v = normal(rng);

            double err = 0.0;
            if (kind == StudyKind::NormalQuantile) {
                std::sort(sample.begin(), sample.end());
                err = std::abs(quantile_sorted(sample, 0.5));
            } else if (kind == StudyKind::W1Decay) {
                err = wasserstein_1d(std::move(sample), reference);
            } else {
                Eigen::VectorXd vec =
                    Eigen::Map<const Eigen::VectorXd>(sample.data(), static_cast<Eigen::Index>(n));
                const Histogram h =
                    make_histogram(vec, ref_hist.edges(0), ref_hist.edges(ref_hist.edges.size() - 1), 20);
                err = kl_divergence(h, ref_hist);
            }
            if (err == 0.0) {
                ++result.dropped;
                continue;
            }
            errors.push_back(err);
        }
        if (errors.empty())
            throw std::runtime_error("convergence_study: all replicates at n=" +
                                     std::to_string(n) + " had exactly zero error");
        result.points.push_back({n, mean_of(errors), median_of(errors),
                                 static_cast<int>(errors.size())});
    }

    std::vector<double> xs, ys;
    for (const auto& pt : result.points) {
        xs.push_back(static_cast<double>(pt.n));
        ys.push_back(pt.mean_error);
    }
    result.fit = fit_loglog(xs, ys);
    return result;
}

/// Per-replicate records in replicate order; values at 6 significant digits.
inline void emit_records_csv(const BenchResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_records_csv: cannot open '" + path + "'");
    out << "dataset,method,pc_config,delta,replicate,metric,value\n";
    for (const auto& rec : result.records)
        out << result.dataset << ',' << rec.method << ',' << rec.pc_config << ','
            << detail::fmt6(rec.delta) << ',' << rec.replicate << ',' << rec.metric << ','
            << detail::fmt6(rec.value) << '\n';
    if (!out) throw std::runtime_error("emit_records_csv: write failed");
}

/// Aggregate table in lexicographic group-key order.
inline void emit_aggregate_csv(std::vector<AggregateRow> rows, const std::string& path) {
    std::sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
        return std::tie(a.method, a.pc_config, a.delta, a.metric) <
               std::tie(b.method, b.pc_config, b.delta, b.metric);
    });
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_aggregate_csv: cannot open '" + path + "'");
    out << "method,pc_config,delta,metric,mean,std,count,p_value\n";
    for (const auto& row : rows) {
        out << row.method << ',' << row.pc_config << ',' << detail::fmt6(row.delta) << ','
            << row.metric << ',' << detail::fmt6(row.mean) << ',' << detail::fmt6(row.stddev)
            << ',' << row.count << ',';
        if (row.p_value) out << detail::fmt6(*row.p_value);
        out << '\n';
    }
    if (!out) throw std::runtime_error("emit_aggregate_csv: write failed");
}

inline void emit_convergence_csv(const ConvergenceResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_convergence_csv: cannot open '" + path + "'");
    out << "study,n,mean_error,median_error,reps_used,slope,slope_se,r2\n";
    for (const auto& pt : result.points)
        out << study_name(result.kind) << ',' << pt.n << ',' << detail::fmt6(pt.mean_error) << ','
            << detail::fmt6(pt.median_error) << ',' << pt.reps_used << ','
            << detail::fmt6(result.fit.slope) << ',' << detail::fmt6(result.fit.slope_se) << ','
            << detail::fmt6(result.fit.r2) << '\n';
    if (!out) throw std::runtime_error("emit_convergence_csv: write failed");
}

}  // namespace pcaqs
