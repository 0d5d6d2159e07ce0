// Command-line driver: dataset generation, one-off sampling, replicated
// benchmarks, and convergence-rate studies.

#include "pcaqs/pcaqs.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct GenFlags {
    std::string family = "block_gaussian";
    int n = 20000;
    int d = 20;
    std::uint64_t seed = 42;
    int block_size = 5;
    double rho = 0.7;
    double prior1 = 0.1;
    double shift = 0.5;
    double var1 = 1.2;
    bool nonlinear = false;

    pcaqs::GeneratorSpec to_spec() const {
        pcaqs::GeneratorSpec spec;
        spec.family = pcaqs::parse_family(family);
        spec.n = n;
        spec.d = d;
        spec.seed = seed;
        spec.block_size = block_size;
        spec.rho = rho;
        spec.prior1 = prior1;
        spec.shift = shift;
        spec.var1 = var1;
        spec.nonlinear = nonlinear;
        return spec;
    }
};

void add_gen_flags(CLI::App* cmd, GenFlags& flags, const char* prefix) {
    const std::string p(prefix);
    cmd->add_option("--" + p + "family", flags.family,
                    "block_gaussian | gmm_binary | structured_classification");
    cmd->add_option("--" + p + "n", flags.n, "sample count");
    cmd->add_option("--" + p + "d", flags.d, "base feature count");
    cmd->add_option("--" + p + "block-size", flags.block_size, "block width (block_gaussian)");
    cmd->add_option("--" + p + "rho", flags.rho, "within-block correlation (block_gaussian)");
    cmd->add_option("--" + p + "prior1", flags.prior1, "class-1 probability (gmm_binary)");
    cmd->add_option("--" + p + "shift", flags.shift, "class-1 mean shift (gmm_binary)");
    cmd->add_option("--" + p + "var1", flags.var1, "class-1 variance (gmm_binary)");
    cmd->add_flag("--" + p + "nonlinear", flags.nonlinear,
                  "append pairwise products and sine transforms (gmm_binary)");
}

int cmd_gen(const GenFlags& flags, const std::string& out_path) {
    const auto generated = pcaqs::generate(flags.to_spec());
    pcaqs::write_csv(generated.data, out_path);
    std::ofstream sidecar(out_path + ".json");
    if (!sidecar) throw std::runtime_error("cannot open sidecar '" + out_path + ".json'");
    sidecar << generated.metadata.dump(2) << '\n';
    std::cerr << "wrote " << generated.data.n() << " rows x " << generated.data.d()
              << " features to " << out_path << '\n';
    return 0;
}

struct SampleFlags {
    std::string input;
    std::string config_path;
    std::string out;
    std::optional<std::string> label_column;
    std::string method = "pcaqs";
    std::optional<long> exact_size;
    std::optional<std::string> groups_out;
    std::optional<std::string> model_out;
    bool allow_constant = false;
};

int cmd_sample(const SampleFlags& flags) {
    const pcaqs::RunConfig config = pcaqs::parse_config_file(flags.config_path);
    const pcaqs::DataMatrix data = pcaqs::load_csv(flags.input, flags.label_column);
    const int n = static_cast<int>(data.n());

    pcaqs::SamplePlan plan;
    if (flags.method == "srs") {
        plan = pcaqs::srs_sample_rate(n, config.delta, config.seed);
    } else if (flags.method == "pcaqs") {
        auto [standardized, scaler] = pcaqs::standardize(data, flags.allow_constant);
        const int k_max =
            static_cast<int>(std::min<Eigen::Index>(standardized.n() - 1, standardized.d()));
        const pcaqs::PcaModel model = pcaqs::fit_pca(standardized.values, k_max);

        int k = 0;
        if (config.k_mode == pcaqs::KMode::Fixed) {
            if (config.k > static_cast<int>(model.k()))
                throw std::runtime_error("fixed k exceeds usable rank " +
                                         std::to_string(model.k()));
            k = config.k;
        } else {
            const auto sel = pcaqs::select_k_variance(
                model.full_ratios(), config.variance_threshold, pcaqs::variance_cap(data.d()));
            if (sel.threshold_unmet)
                std::cerr << "warning: variance threshold unreachable within cap, using k=" << sel.k
                          << '\n';
            k = sel.k;
        }

        const Eigen::MatrixXd scores =
            standardized.values * model.components.topRows(k).transpose();
        const int m = config.resolved_m(k);
        const pcaqs::QuantileGrid grid = pcaqs::build_grid(scores, m);
        if (grid.sparse_for(n))
            std::cerr << "warning: m^k exceeds n; most composite groups will be singletons\n";
        const pcaqs::GroupAssignment assignment =
            pcaqs::composite_keys(pcaqs::bin_matrix(scores, grid));
        plan = pcaqs::pcaqs_sample(assignment, config.delta, config.seed);

        if (flags.groups_out) pcaqs::write_assignment_csv(assignment, *flags.groups_out);
        if (flags.model_out) {
            std::ofstream mo(*flags.model_out);
            if (!mo) throw std::runtime_error("cannot open '" + *flags.model_out + "'");
            mo << pcaqs::pca_model_to_json(model).dump(2) << '\n';
        }
        std::cerr << "k=" << k << " m=" << m << " groups=" << assignment.n_groups() << '\n';
    } else {
        throw std::runtime_error("unknown --method '" + flags.method + "' (pcaqs|srs)");
    }

    if (flags.exact_size)
        plan = pcaqs::trim_to_size(plan, *flags.exact_size, config.seed);
    pcaqs::write_indices_csv(plan, flags.out);
    std::cerr << "retained " << plan.retained.size() << " of " << n << " rows -> " << flags.out
              << '\n';
    return 0;
}

struct BenchFlags {
    std::string config_path;
    std::string data;
    std::string out;
    std::optional<std::string> aggregate_out;
    std::optional<std::string> label_column;
    std::string srs_baseline = "size";
    GenFlags gen;
};

int cmd_bench(const BenchFlags& flags) {
    const pcaqs::RunConfig config = pcaqs::parse_config_file(flags.config_path);

    pcaqs::DataSource source = [&] {
        if (flags.data.rfind("gen:", 0) == 0) {
            GenFlags gen = flags.gen;
            gen.family = flags.data.substr(4);
            return pcaqs::DataSource::from_generator(gen.to_spec());
        }
        auto name = flags.data;
        if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
            name = name.substr(slash + 1);
        return pcaqs::DataSource::from_data(pcaqs::load_csv(flags.data, flags.label_column),
                                            name);
    }();

    pcaqs::SrsBaseline baseline;
    if (flags.srs_baseline == "size")
        baseline = pcaqs::SrsBaseline::SizeMatched;
    else if (flags.srs_baseline == "rate")
        baseline = pcaqs::SrsBaseline::RateMatched;
    else
        throw std::runtime_error("unknown --srs-baseline '" + flags.srs_baseline +
                                 "' (size|rate)");

    const pcaqs::BenchResult result = pcaqs::run_benchmark(config, source, baseline);
    for (const auto& warning : result.warnings) std::cerr << "note: " << warning << '\n';

    pcaqs::emit_records_csv(result, flags.out);
    if (flags.aggregate_out)
        pcaqs::emit_aggregate_csv(pcaqs::aggregate(result.records), *flags.aggregate_out);

    nlohmann::json meta;
    meta["dataset"] = result.dataset;
    meta["replications"] = result.replications;
    meta["failed_replicates"] = result.failed;
    meta["metric_point_cap"] = result.metric_point_cap;
    meta["seed"] = config.seed;
    meta["delta"] = config.delta;
    meta["metrics"] = config.metrics;
    meta["srs_baseline"] = flags.srs_baseline;
    std::ofstream meta_out(flags.out + ".meta.json");
    if (!meta_out) throw std::runtime_error("cannot open '" + flags.out + ".meta.json'");
    meta_out << meta.dump(2) << '\n';

    std::cerr << result.records.size() << " records -> " << flags.out << " ("
              << result.failed << " failed replicates)\n";
    return result.failed == 0 ? 0 : 1;
}

struct ConvergeFlags {
    std::string study = "normal_quantile";
    std::string out;
    int reps = 100;
    std::uint64_t seed = 42;
    std::vector<int> n_grid = {1000, 3162, 10000, 31623, 100000};
};

int cmd_converge(const ConvergeFlags& flags) {
    const auto result =
        pcaqs::convergence_study(pcaqs::parse_study(flags.study), flags.n_grid, flags.reps,
                                 flags.seed);
    pcaqs::emit_convergence_csv(result, flags.out);
    std::cerr << flags.study << ": slope=" << result.fit.slope << " +- " << result.fit.slope_se
              << " (r2=" << result.fit.r2 << ", dropped=" << result.dropped << ") -> "
              << flags.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PCA-guided quantile sampling toolkit"};
    app.require_subcommand(1);

    GenFlags gen_flags;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV + JSON sidecar");
    add_gen_flags(gen, gen_flags, "");
    gen->add_option("--seed", gen_flags.seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    SampleFlags sample_flags;
    auto* sample = app.add_subcommand("sample", "draw a subsample from a CSV dataset");
    sample->add_option("--input", sample_flags.input, "input CSV")->required();
    sample->add_option("--config", sample_flags.config_path, "run config JSON")->required();
    sample->add_option("--out", sample_flags.out, "retained-indices CSV")->required();
    std::string sample_label, groups_out, model_out;
    sample->add_option("--label-column", sample_label, "label column name");
    sample->add_option("--method", sample_flags.method, "pcaqs | srs");
    long exact_size = -1;
    sample->add_option("--exact-size", exact_size, "trim the plan to exactly this many rows");
    sample->add_option("--groups-out", groups_out, "write (row_index,key) audit CSV");
    sample->add_option("--model-out", model_out, "write the fitted PCA model JSON");
    sample->add_flag("--allow-constant", sample_flags.allow_constant,
                     "standardize constant columns with std = 1 instead of failing");

    BenchFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "replicated PCA-QS vs SRS benchmark");
    bench->add_option("--config", bench_flags.config_path, "run config JSON")->required();
    bench->add_option("--data", bench_flags.data, "CSV path or gen:<family>")->required();
    bench->add_option("--out", bench_flags.out, "per-replicate records CSV")->required();
    std::string agg_out, bench_label;
    bench->add_option("--aggregate-out", agg_out, "aggregate table CSV");
    bench->add_option("--label-column", bench_label, "label column name (CSV sources)");
    bench->add_option("--srs-baseline", bench_flags.srs_baseline,
                      "size (match |PCA-QS retained|) or rate (ceil(delta*n))");
    add_gen_flags(bench, bench_flags.gen, "gen-");

    ConvergeFlags conv_flags;
    auto* converge = app.add_subcommand("converge", "convergence-rate study");
    converge->add_option("--study", conv_flags.study,
                         "normal_quantile | kl_decay | w1_decay");
    converge->add_option("--out", conv_flags.out, "output CSV")->required();
    converge->add_option("--reps", conv_flags.reps, "replicates per grid point");
    converge->add_option("--seed", conv_flags.seed, "study seed");
    converge->add_option("--n-grid", conv_flags.n_grid, "sample-size grid (strictly increasing)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_flags, gen_out);
        if (sample->parsed()) {
            if (!sample_label.empty()) sample_flags.label_column = sample_label;
            if (exact_size >= 0) sample_flags.exact_size = exact_size;
            if (!groups_out.empty()) sample_flags.groups_out = groups_out;
            if (!model_out.empty()) sample_flags.model_out = model_out;
            return cmd_sample(sample_flags);
        }
        if (bench->parsed()) {
            if (!agg_out.empty()) bench_flags.aggregate_out = agg_out;
            if (!bench_label.empty()) bench_flags.label_column = bench_label;
            return cmd_bench(bench_flags);
        }
        if (converge->parsed()) return cmd_converge(conv_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
