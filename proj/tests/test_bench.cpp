#include "pcaqs/bench.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pcaqs;
using Catch::Matchers::WithinAbs;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.k_mode = KMode::Fixed;
    cfg.k = 2;
    cfg.m = 4;
    cfg.delta = 0.1;
    cfg.replications = 3;
    cfg.seed = 11;
    cfg.metrics = {"energy"};
    return cfg;
}

DataSource small_source() {
    GeneratorSpec spec;
    spec.family = Family::BlockGaussian;
    spec.n = 400;
    spec.d = 6;
    spec.block_size = 3;
    spec.rho = 0.6;
    return DataSource::from_generator(spec);
}

}  // namespace

TEST_CASE("aggregate on [1,3] gives mean 2 and std sqrt(2)") {
    std::vector<RunRecord> records = {
        {0, "PCA-QS", "fixed=2", 0.1, "energy", 1.0, 1},
        {1, "PCA-QS", "fixed=2", 0.1, "energy", 3.0, 2},
    };
    const auto rows = aggregate(records);
    REQUIRE(rows.size() == 1);
    REQUIRE_THAT(rows[0].mean, WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(rows[0].stddev, WithinAbs(1.4142135623730951, 1e-12));
    REQUIRE(rows[0].count == 2);
}

TEST_CASE("aggregate flags single values with std 0 and partitions counts") {
    std::vector<RunRecord> records = {
        {0, "PCA-QS", "fixed=2", 0.1, "energy", 1.0, 1},
        {0, "SRS", "-", 0.1, "energy", 2.0, 1},
        {1, "SRS", "-", 0.1, "energy", 4.0, 2},
    };
    const auto rows = aggregate(records);
    REQUIRE(rows.size() == 2);
    int total = 0;
    for (const auto& row : rows) {
        total += row.count;
        if (row.method == "PCA-QS") {
            REQUIRE(row.count == 1);
            REQUIRE(row.stddev == 0.0);
        }
    }
    REQUIRE(total == 3);
}

TEST_CASE("aggregate matches an independent single-pass oracle") {
    Rng rng = make_rng(81, "agg-oracle");
    std::vector<RunRecord> records;
    for (int r = 0; r < 50; ++r)
        records.push_back({r, "SRS", "-", 0.05, "kl", normal(rng) + 5.0, 0});
    const auto rows = aggregate(records);
    REQUIRE(rows.size() == 1);
    double s = 0.0, ss = 0.0;
    for (const auto& rec : records) {
        s += rec.value;
        ss += rec.value * rec.value;
    }
    const double mean = s / 50.0;
    const double var = (ss - 50.0 * mean * mean) / 49.0;
    REQUIRE_THAT(rows[0].mean, WithinAbs(mean, 1e-12));
    REQUIRE_THAT(rows[0].stddev, WithinAbs(std::sqrt(var), 1e-12));
}

TEST_CASE("welch test on equal samples gives p = 1") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const auto r = welch_t_test(a, a);
    REQUIRE(r.t == 0.0);
    REQUIRE(r.p_value == 1.0);
}

TEST_CASE("welch test separates distant samples below 1e-12") {
    Rng rng = make_rng(82, "welch-sep");
    std::vector<double> a(100), b(100);
    for (auto& v : a) v = 0.01 * normal(rng);
    for (auto& v : b) v = 10.0 + 0.01 * normal(rng);
    const auto r = welch_t_test(a, b);
    REQUIRE(r.p_value < 1e-12);
    REQUIRE(r.p_value >= 0.0);
}

TEST_CASE("welch test is symmetric and validates sizes") {
    Rng rng = make_rng(83, "welch-sym");
    std::vector<double> a(30), b(40);
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng) + 0.2;
    REQUIRE_THAT(welch_t_test(a, b).p_value, WithinAbs(welch_t_test(b, a).p_value, 1e-14));
    REQUIRE_THROWS(welch_t_test(std::vector<double>{1.0}, b));
}

TEST_CASE("run_benchmark produces replications x methods x metrics records") {
    const auto result = run_benchmark(small_config(), small_source());
    REQUIRE(result.failed == 0);
    REQUIRE(result.records.size() == 6);  // 3 replications x 2 methods x 1 metric
    for (const auto& rec : result.records) {
        REQUIRE((rec.method == "PCA-QS" || rec.method == "SRS"));
        REQUIRE(rec.metric == "energy");
        if (rec.method == "PCA-QS") REQUIRE(rec.pc_config == "fixed=2");
        if (rec.method == "SRS") REQUIRE(rec.pc_config == "-");
    }
}

TEST_CASE("dynamic mode records the resolved component count") {
    RunConfig cfg = small_config();
    cfg.k_mode = KMode::Dynamic;
    cfg.variance_threshold = 0.70;
    cfg.replications = 2;
    const auto result = run_benchmark(cfg, small_source());
    for (const auto& rec : result.records)
        if (rec.method == "PCA-QS") REQUIRE(rec.pc_config.rfind("dyn=", 0) == 0);
}

TEST_CASE("identical configs give byte-identical CSV output") {
    const auto out_a = (std::filesystem::temp_directory_path() / "pcaqs_bench_a.csv").string();
    const auto out_b = (std::filesystem::temp_directory_path() / "pcaqs_bench_b.csv").string();
    const auto result_a = run_benchmark(small_config(), small_source());
    const auto result_b = run_benchmark(small_config(), small_source());
    emit_records_csv(result_a, out_a);
    emit_records_csv(result_b, out_b);
    REQUIRE(read_file(out_a) == read_file(out_b));
    REQUIRE(read_file(out_a).rfind("dataset,method,pc_config,delta,replicate,metric,value\n", 0) ==
            0);
}

TEST_CASE("benchmark seeds differ across replicates but respect the base seed") {
    const auto result = run_benchmark(small_config(), small_source());
    std::set<std::uint64_t> seeds;
    for (const auto& rec : result.records) seeds.insert(rec.seed);
    REQUIRE(seeds.size() == 3);
    REQUIRE(seeds.count(11));
    REQUIRE(seeds.count(12));
    REQUIRE(seeds.count(13));
}

TEST_CASE("classification records appear when test rows and labels exist") {
    RunConfig cfg;
    cfg.k_mode = KMode::Fixed;
    cfg.k = 2;
    cfg.m = 3;
    cfg.delta = 0.3;
    cfg.replications = 2;
    cfg.seed = 21;
    cfg.test_size = 100;
    cfg.metrics = {"js"};

    GeneratorSpec spec;
    spec.family = Family::GmmBinary;
    spec.n = 900;
    spec.d = 4;
    spec.prior1 = 0.3;
    const auto result = run_benchmark(cfg, DataSource::from_generator(spec));
    REQUIRE(result.failed == 0);

    std::set<std::string> metrics;
    for (const auto& rec : result.records) metrics.insert(rec.metric);
    for (const char* name : {"js", "accuracy", "auc", "f1", "tpr", "tnr", "fpr", "fnr",
                             "threshold"})
        REQUIRE(metrics.count(name));
}

TEST_CASE("rate-matched baseline draws ceil(delta*n) SRS rows") {
    // one stratum per bin along a single component keeps groups large, so the
    // PCA-QS plan lands near delta*n while the rate-matched SRS hits it exactly
    RunConfig cfg = small_config();
    cfg.k = 1;
    cfg.m = 2;
    cfg.replications = 2;
    cfg.metrics = {"kl"};
    const auto result =
        run_benchmark(cfg, small_source(), SrsBaseline::RateMatched);
    REQUIRE(result.failed == 0);
    // delta=0.1 on n=400: SRS must hold exactly ceil(40) = 40 rows; verify via
    // the recorded delta and a direct plan draw
    const auto plan = srs_sample_rate(400, cfg.delta, 1);
    REQUIRE(plan.retained.size() == 40);
}

TEST_CASE("impossible configurations fail replicates loudly") {
    RunConfig cfg = small_config();
    cfg.k = 100;  // exceeds rank
    REQUIRE_THROWS_WITH(run_benchmark(cfg, small_source()),
                        Catch::Matchers::ContainsSubstring("zero successful replicates"));
}

TEST_CASE("aggregate attaches Welch p-values to PCA-QS rows") {
    RunConfig cfg = small_config();
    cfg.replications = 5;
    const auto result = run_benchmark(cfg, small_source());
    const auto rows = aggregate(result.records);
    for (const auto& row : rows) {
        if (row.method == "PCA-QS") {
            REQUIRE(row.p_value.has_value());
            REQUIRE(*row.p_value >= 0.0);
            REQUIRE(*row.p_value <= 1.0);
        } else {
            REQUIRE_FALSE(row.p_value.has_value());
        }
    }
}

TEST_CASE("emit_aggregate_csv writes a header-only file for empty input") {
    const auto path = (std::filesystem::temp_directory_path() / "pcaqs_agg_empty.csv").string();
    emit_aggregate_csv({}, path);
    REQUIRE(read_file(path) == "method,pc_config,delta,metric,mean,std,count,p_value\n");
}

TEST_CASE("records CSV round-trips through a line parse") {
    const auto result = run_benchmark(small_config(), small_source());
    const auto path = (std::filesystem::temp_directory_path() / "pcaqs_records.csv").string();
    emit_records_csv(result, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    int last_replicate = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        REQUIRE(cells[0] == "gen:block_gaussian");
        const int rep = std::stoi(cells[4]);
        REQUIRE(rep >= last_replicate);  // replicate-index ordering
        last_replicate = rep;
    }
    REQUIRE(rows == static_cast<int>(result.records.size()));
}

TEST_CASE("convergence study validates its inputs") {
    REQUIRE_THROWS(convergence_study(StudyKind::NormalQuantile, {100, 200, 300}, 20, 1));
    REQUIRE_THROWS(convergence_study(StudyKind::NormalQuantile, {100, 200, 300, 250}, 20, 1));
    REQUIRE_THROWS(convergence_study(StudyKind::NormalQuantile, {100, 200, 300, 400}, 5, 1));
}

TEST_CASE("log-log fit of a constant error has slope near zero") {
    const std::vector<double> xs = {100, 300, 1000, 3000};
    const std::vector<double> ys = {0.5, 0.5, 0.5, 0.5};
    const auto fit = fit_loglog(xs, ys);
    REQUIRE_THAT(fit.slope, WithinAbs(0.0, 1e-12));
}

TEST_CASE("fit_loglog recovers an exact power law") {
    std::vector<double> xs, ys;
    for (double x : {10.0, 100.0, 1000.0, 10000.0}) {
        xs.push_back(x);
        ys.push_back(3.0 * std::pow(x, -0.5));
    }
    const auto fit = fit_loglog(xs, ys);
    REQUIRE_THAT(fit.slope, WithinAbs(-0.5, 1e-10));
    REQUIRE_THAT(fit.r2, WithinAbs(1.0, 1e-10));
    REQUIRE(fit.slope_se < 1e-10);
}

TEST_CASE("quantile study output carries per-n errors and a fit") {
    const auto result =
        convergence_study(StudyKind::NormalQuantile, {200, 400, 800, 1600}, 20, 5);
    REQUIRE(result.points.size() == 4);
    for (const auto& pt : result.points) {
        REQUIRE(pt.mean_error > 0.0);
        REQUIRE(pt.median_error > 0.0);
        REQUIRE(pt.reps_used > 0);
    }
    REQUIRE(result.fit.slope < 0.0);

    const auto path = (std::filesystem::temp_directory_path() / "pcaqs_conv.csv").string();
    emit_convergence_csv(result, path);
    const auto text = read_file(path);
    REQUIRE(text.rfind("study,n,", 0) == 0);
    REQUIRE(text.find("normal_quantile") != std::string::npos);
}
