// spca_slr: sample spiked data, run the Q-statistic detector and the
// baselines, and reproduce the recovery/testing benchmarks as CSV.
//
// Exit codes: 0 success, 1 parameter error, 2 runtime failure.

#include "CLI11.hpp"
#include "selfcheck.hpp"
#include "spca_slr/spca_slr.hpp"

#include <chrono>
#include <optional>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

using namespace spca_slr;

namespace {

constexpr int kExitParameter = 1;
constexpr int kExitRuntime = 2;

/// Flags shared by every subcommand; each set flag overrides the same key
/// from --config.
struct Flags {
    std::map<std::string, std::string> values;
    std::string config_path;
    std::string input_path;
    std::string spike = "random_signs";

    void attach(CLI::App& sub) {
        static const std::vector<std::pair<std::string, std::string>> keyed{
            {"n", "samples"},
            {"d", "dimension"},
            {"k", "sparsity (comma list for the benches)"},
            {"theta", "spike strength"},
            {"trials", "trials per k"},
            {"seed", "base seed"},
            {"solver", "SLR solver: lasso_topk, omp, l0"},
            {"lambda", "Lasso penalty"},
            {"lambda_rule", "fixed or plug_in"},
            {"method", "method name (comma list for the benches)"},
            {"tau", "covariance thresholding constant"},
            {"threads", "worker threads, 0 = all cores"},
            {"preset", "desk, figure1, figure1_wide, figure2"},
            {"out", "output path"},
        };
        for (const auto& [key, help] : keyed) sub.add_option("--" + key, values[key], help);
        sub.add_flag("--rescale", rescale, "rescale every coordinate to unit sample variance");
        sub.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
        sub.add_option("--input", input_path, "read the data matrix from CSV instead of sampling")
            ->check(CLI::ExistingFile);
        sub.add_option("--spike", spike, "uniform, random_signs, random_sphere");
    }

    /// Config file entries overridden by the flags actually given.
    ConfigMap entries(const CLI::App& sub, ConfigMap defaults = {}) const {
        ConfigMap merged = std::move(defaults);
        if (!config_path.empty()) {
            for (auto& [key, value] : load_config_file(config_path)) merged[key] = value;
        }
        for (const auto& [key, value] : values) {
            if (sub.count("--" + key) > 0) merged[key == "method" ? "methods" : key] = value;
        }
        if (rescale) merged["rescale"] = "true";
        return merged;
    }

    bool rescale = false;
};

struct Dataset {
    SampleMatrix x;
    std::optional<SpikedModel> model;
};

Index single_k(const ExperimentConfig& config) {
    detail::require(config.k_values.size() == 1, "expected a single --k value");
    return config.k_values.front();
}

Dataset load_or_sample(const Flags& flags, const ExperimentConfig& config, Index k) {
    Dataset data;
    if (!flags.input_path.empty()) {
        data.x.data = read_matrix_csv(flags.input_path);
    } else {
        detail::require(k >= 1 && k <= config.d, "need 1 <= k <= d");
        const Seed seed = config.base_seed;
        data.model = make_model(config.d, k, config.theta, parse_spike_mode(flags.spike), stream_seed(seed, 1));
        data.x = sample_spiked(*data.model, config.n, stream_seed(seed, 2));
    }
    data.x.validate();
    if (config.rescale) data.x = rescale_unit_variance(data.x);
    return data;
}

void print_indices(const char* label, const IndexSet& indices) {
    std::printf("%s", label);
    for (std::size_t j = 0; j < indices.size(); ++j) std::printf("%s%lld", j ? "," : "", static_cast<long long>(indices[j]));
    std::printf("\n");
}

ExperimentConfig single_dataset_config(const Flags& flags, const CLI::App& sub) {
    ExperimentConfig config;
    apply_config(flags.entries(sub, {{"k", "10"}}), config);
    return config;
}

int cmd_gen(const Flags& flags, const CLI::App& sub) {
    const ExperimentConfig config = single_dataset_config(flags, sub);
    const Dataset data = load_or_sample(flags, config, single_k(config));
    if (config.out_path.empty()) {
        write_matrix_csv(std::cout, data.x.data);
    } else {
        write_matrix_csv(config.out_path, data.x.data);
    }
    if (data.model) {
        std::fprintf(stderr, "support:");
        for (Index j : data.model->spike.support) std::fprintf(stderr, " %lld", static_cast<long long>(j));
        std::fprintf(stderr, "\n");
    }
    return 0;
}

int cmd_qtest(const Flags& flags, const CLI::App& sub) {
    const ExperimentConfig config = single_dataset_config(flags, sub);
    const Index k = single_k(config);
    const Dataset data = load_or_sample(flags, config, k);
    const auto solver = make_solver(config.solver, config.solver_options);
    const TestResult result = hypothesis_test(data.x, k, *solver, TestMode::full, config.threads);
    std::printf("decision=%d\n", result.decision);
    std::printf("q_max=%s\n", format_number(result.report.q_max()).c_str());
    std::printf("threshold=%s\n", format_number(result.report.threshold).c_str());
    std::printf("exceedances=%lld\n", static_cast<long long>(result.report.exceed_count()));
    std::printf("solver=%s\n", result.report.solver_name.c_str());
    return 0;
}

int cmd_recover(const Flags& flags, const CLI::App& sub) {
    ExperimentConfig config;
    apply_config(flags.entries(sub, {{"k", "10"}, {"methods", "qslr"}}), config);
    const Index k = single_k(config);
    detail::require(config.methods.size() == 1, "recover takes a single --method");
    const std::string& method = config.methods.front();
    const auto& known = registered_methods(ExperimentKind::recovery);
    detail::require(std::find(known.begin(), known.end(), method) != known.end(),
                    "unknown recovery method '" + method + "' (expected dt, ct, tpower or qslr)");
    const auto solver = make_solver(config.solver, config.solver_options);
    const Dataset data = load_or_sample(flags, config, k);
    detail::require(k >= 1 && k < data.x.d(), "need 1 <= k < d");

    IndexSet selected;
    if (method == "dt") {
        selected = diagonal_thresholding(data.x, k).selected;
    } else if (method == "ct") {
        selected = covariance_thresholding(data.x, k, config.tau).selected;
    } else if (method == "tpower") {
        selected = truncated_power_method(empirical_covariance(data.x), k, config.tpower).selected;
    } else {
        selected = recover_topk(data.x, k, *solver, config.threads).selected;
    }
    print_indices("selected=", selected);
    if (data.model) {
        print_indices("support=", data.model->spike.support);
        std::printf("overlap_fraction=%g\n",
                    static_cast<double>(overlap_count(selected, data.model->spike.support)) / static_cast<double>(k));
    }
    return 0;
}

int cmd_bench(const Flags& flags, const CLI::App& sub, const std::string& default_preset) {
    ExperimentConfig config;
    apply_config(flags.entries(sub, {{"preset", default_preset}}), config);
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.out_path.empty()) {
        write_csv(std::cout, result);
    } else {
        write_csv(config.out_path, result);
    }
    for (const auto& s : result.summaries) {
        std::fprintf(stderr, "%-7s k=%-3lld %s=%.4f", s.method.c_str(), static_cast<long long>(s.k), s.metric.c_str(),
                     s.value);
        if (s.label == "mean") std::fprintf(stderr, " (se %.4f)", s.stderr_value);
        std::fprintf(stderr, "\n");
    }
    std::fprintf(stderr, "elapsed %.1fs\n", seconds);
    return 0;
}

int cmd_verify() {
    bool all = true;
    for (const auto& check : selfcheck::all_checks()) {
        const selfcheck::Check result = check();
        std::printf("[%s] %s: %s\n", result.passed ? "PASS" : "FAIL", result.name.c_str(), result.detail.c_str());
        all = all && result.passed;
    }
    return all ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse PCA via sparse linear regression: detector, baselines and benchmarks"};
    app.require_subcommand(1);

    Flags flags;
    auto* gen = app.add_subcommand("gen", "sample a spiked matrix and write it as CSV");
    auto* qtest = app.add_subcommand("qtest", "run the Q-statistic hypothesis test on one dataset");
    auto* recover = app.add_subcommand("recover", "top-k support recovery on one dataset");
    auto* bench_recovery = app.add_subcommand("bench-recovery", "support-recovery benchmark (CSV)");
    auto* bench_testing = app.add_subcommand("bench-testing", "hypothesis-testing benchmark (CSV)");
    auto* verify = app.add_subcommand("verify", "run the built-in self-checks");
    for (auto* sub : {gen, qtest, recover, bench_recovery, bench_testing}) flags.attach(*sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParameter;
    }

    try {
        if (*gen) return cmd_gen(flags, *gen);
        if (*qtest) return cmd_qtest(flags, *qtest);
        if (*recover) return cmd_recover(flags, *recover);
        if (*bench_recovery) return cmd_bench(flags, *bench_recovery, "desk");
        if (*bench_testing) return cmd_bench(flags, *bench_testing, "figure2");
        if (*verify) return cmd_verify();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParameter;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
