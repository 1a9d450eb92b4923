#ifndef SPCA_SLR_HARNESS_HPP
#define SPCA_SLR_HARNESS_HPP

// Seeded, trial-averaged experiment runner for the support-recovery and
// hypothesis-testing comparisons.
//
// CSV schema (bit-exact): header `method,k,theta,trial,metric,value`, one
// row per line, '\n' terminated, numbers printed with %.17g. Trial rows come
// first, sorted by (method, k, trial); summary rows follow, sorted by
// (method, k), with the trial column holding `mean` (recovery) or `summary`
// (testing). Every unit of work draws from seeds derived from
// (base_seed, trial, k) only, so output does not depend on the thread count.

#include "spca_slr/baselines.hpp"
#include "spca_slr/detect.hpp"
#include "spca_slr/errors.hpp"
#include "spca_slr/model.hpp"
#include "spca_slr/parallel.hpp"
#include "spca_slr/rng.hpp"
#include "spca_slr/sampler.hpp"
#include "spca_slr/slr.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace spca_slr {

enum class ExperimentKind { recovery, testing };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::recovery;
    Index n = 300;
    Index d = 300;
    std::vector<Index> k_values{5, 10, 15};
    double theta = 3.0;
    int trials = 20;
    std::vector<std::string> methods{"dt", "ct", "tpower", "qslr"};
    std::string solver = "lasso_topk";
    SolverOptions solver_options;
    double tau = 4.0;          ///< covariance thresholding constant
    TpowerSettings tpower;
    int mdp_grid_points = 30;
    bool rescale = false;      ///< unit-variance rescaling of every dataset
    Seed base_seed = 1;
    std::string out_path;
    unsigned threads = 0;      ///< 0 = hardware concurrency

    void validate() const;
};

inline const std::vector<std::string>& registered_methods(ExperimentKind kind) {
    static const std::vector<std::string> recovery{"dt", "ct", "tpower", "qslr"};
    static const std::vector<std::string> testing{"dt", "mdp", "qslr"};
    return kind == ExperimentKind::recovery ? recovery : testing;
}

inline void ExperimentConfig::validate() const {
    detail::require(n >= 1, "config: n must be >= 1");
    detail::require(d >= 2, "config: d must be >= 2");
    detail::require(trials >= 1, "config: trials must be >= 1");
    detail::require(!k_values.empty(), "config: k_values is empty");
    for (Index k : k_values) {
        detail::require(k >= 1 && k < d, "config: every k must satisfy 1 <= k < d");
    }
    detail::require(std::isfinite(theta) && theta >= 0.0, "config: theta must be finite and nonnegative");
    detail::require(!methods.empty(), "config: no methods");
    const auto& known = registered_methods(kind);
    for (const auto& m : methods) {
        detail::require(std::find(known.begin(), known.end(), m) != known.end(),
                        "config: method '" + m + "' is not available for this experiment kind");
    }
    make_solver(solver, solver_options);
    detail::require(tau >= 0.0, "config: tau must be nonnegative");
    detail::require(mdp_grid_points >= 2, "config: mdp_grid_points must be >= 2");
}

struct TrialRecord {
    std::string method;
    Index k = 0;
    double theta = 0.0;
    int trial_index = 0;
    std::string metric;  ///< overlap_fraction, statistic_h0, statistic_h1, error
    double value = 0.0;
};

struct SummaryRecord {
    std::string method;
    Index k = 0;
    double theta = 0.0;
    std::string label;   ///< `mean` or `summary`
    std::string metric;
    double value = 0.0;
    double stderr_value = 0.0;  ///< standard error of the mean (recovery only; not written to CSV)
};

struct ExperimentResult {
    std::vector<TrialRecord> trials;
    std::vector<SummaryRecord> summaries;
};

// ---------------------------------------------------------------------------
// Statistics helpers

/// min over cutoffs c of (P_H0(stat > c) + P_H1(stat <= c)) / 2, with c
/// ranging over -inf and every observed value.
inline double best_cutoff_error(std::vector<double> h0, std::vector<double> h1) {
    detail::require(!h0.empty() && !h1.empty(), "best_cutoff_error: empty sample");
    std::sort(h0.begin(), h0.end());
    std::sort(h1.begin(), h1.end());
    const auto n0 = static_cast<double>(h0.size());
    const auto n1 = static_cast<double>(h1.size());
    double best = 0.5 * (1.0 + 0.0);  // c = -inf: every H0 value rejects
    std::vector<double> cutoffs = h0;
    cutoffs.insert(cutoffs.end(), h1.begin(), h1.end());
    for (double c : cutoffs) {
        const auto h0_above = static_cast<double>(h0.end() - std::upper_bound(h0.begin(), h0.end(), c));
        const auto h1_below = static_cast<double>(std::upper_bound(h1.begin(), h1.end(), c) - h1.begin());
        best = std::min(best, 0.5 * (h0_above / n0 + h1_below / n1));
    }
    return best;
}

inline std::pair<double, double> mean_and_stderr(const std::vector<double>& values) {
    const auto count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline Seed unit_seed(Seed base_seed, int trial, Index k) {
    return stream_seed(trial_seed(base_seed, static_cast<std::uint64_t>(trial)), static_cast<std::uint64_t>(k));
}

inline SampleMatrix maybe_rescale(SampleMatrix x, bool rescale) {
    return rescale ? rescale_unit_variance(x) : x;
}

inline bool record_less(const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.method, a.k, a.trial_index, a.metric) < std::tie(b.method, b.k, b.trial_index, b.metric);
}

inline void sort_summaries(std::vector<SummaryRecord>& summaries) {
    std::sort(summaries.begin(), summaries.end(), [](const SummaryRecord& a, const SummaryRecord& b) {
        return std::tie(a.method, a.k, a.metric) < std::tie(b.method, b.k, b.metric);
    });
}

}  // namespace detail

/// Overlap |S_hat & S| / k of each method's top-k selection on random_signs
/// spikes; one row per (method, k, trial) plus a mean row per (method, k).
/// A method that throws contributes an `error` row instead of an overlap.
inline ExperimentResult run_recovery_experiment(const ExperimentConfig& config) {
    detail::require(config.kind == ExperimentKind::recovery, "run_recovery_experiment: config kind must be recovery");
    config.validate();
    const auto solver = make_solver(config.solver, config.solver_options);
    const std::size_t n_units = config.k_values.size() * static_cast<std::size_t>(config.trials);
    std::vector<std::vector<TrialRecord>> slots(n_units);

    // Inner Q solves stay sequential; parallelism is across (k, trial) units.
    parallel_for(n_units, config.threads, [&](std::size_t unit) {
        const Index k = config.k_values[unit / static_cast<std::size_t>(config.trials)];
        const int trial = static_cast<int>(unit % static_cast<std::size_t>(config.trials));
        const Seed seed = detail::unit_seed(config.base_seed, trial, k);
        const SpikedModel model = make_model(config.d, k, config.theta, SpikeMode::random_signs, stream_seed(seed, 1));
        const SampleMatrix x = detail::maybe_rescale(sample_spiked(model, config.n, stream_seed(seed, 2)), config.rescale);
        const Matrix sigma_hat = empirical_covariance(x);

        for (const auto& method : config.methods) {
            TrialRecord row{method, k, config.theta, trial, "overlap_fraction", 0.0};
            try {
                IndexSet selected;
                if (method == "dt") {
                    selected = diagonal_thresholding(x, k).selected;
                } else if (method == "ct") {
                    selected = covariance_thresholding(x, k, config.tau).selected;
                } else if (method == "tpower") {
                    selected = truncated_power_method(sigma_hat, k, config.tpower).selected;
                } else {
                    selected = recover_topk(x, k, *solver, 1).selected;
                }
                row.value = static_cast<double>(overlap_count(selected, model.spike.support)) / static_cast<double>(k);
            } catch (const std::exception&) {
                row.metric = "error";
                row.value = 1.0;
            }
            slots[unit].push_back(std::move(row));
        }
    });

    ExperimentResult result;
    for (auto& slot : slots) {
        for (auto& row : slot) result.trials.push_back(std::move(row));
    }
    std::sort(result.trials.begin(), result.trials.end(), detail::record_less);

    for (const auto& method : config.methods) {
        for (Index k : config.k_values) {
            std::vector<double> values;
            for (const auto& row : result.trials) {
                if (row.method == method && row.k == k && row.metric == "overlap_fraction") values.push_back(row.value);
            }
            if (values.empty()) continue;
            const auto [mean, se] = mean_and_stderr(values);
            result.summaries.push_back({method, k, config.theta, "mean", "overlap_fraction", mean, se});
        }
    }
    detail::sort_summaries(result.summaries);
    return result;
}

/// Per trial, one H0 (isotropic) and one H1 (random_sphere spike) dataset;
/// each method's statistic on both, plus a best-cutoff error per (method, k).
/// Statistics: dt = largest variance, mdp = minimal dual perturbation,
/// qslr = max_i Q_i.
inline ExperimentResult run_testing_experiment(const ExperimentConfig& config) {
    detail::require(config.kind == ExperimentKind::testing, "run_testing_experiment: config kind must be testing");
    config.validate();
    const auto solver = make_solver(config.solver, config.solver_options);
    const std::size_t n_units = config.k_values.size() * static_cast<std::size_t>(config.trials);
    std::vector<std::vector<TrialRecord>> slots(n_units);
    const std::vector<double> grid = mdp_default_grid(config.n, config.d, config.mdp_grid_points);

    parallel_for(n_units, config.threads, [&](std::size_t unit) {
        const Index k = config.k_values[unit / static_cast<std::size_t>(config.trials)];
        const int trial = static_cast<int>(unit % static_cast<std::size_t>(config.trials));
        const Seed seed = detail::unit_seed(config.base_seed, trial, k);
        const SpikedModel model = make_model(config.d, k, config.theta, SpikeMode::random_sphere, stream_seed(seed, 1));
        const SampleMatrix h0 = detail::maybe_rescale(sample_null(config.d, config.n, stream_seed(seed, 2)), config.rescale);
        const SampleMatrix h1 = detail::maybe_rescale(sample_spiked(model, config.n, stream_seed(seed, 3)), config.rescale);

        for (const auto& method : config.methods) {
            auto statistic = [&](const SampleMatrix& x) {
                if (method == "dt") return dt_statistic(x);
                if (method == "mdp") return mdp_statistic(empirical_covariance(x), k, grid);
                return compute_q_report(x, k, *solver, 1).q_max();
            };
            try {
                const double s0 = statistic(h0);
                const double s1 = statistic(h1);
                slots[unit].push_back({method, k, config.theta, trial, "statistic_h0", s0});
                slots[unit].push_back({method, k, config.theta, trial, "statistic_h1", s1});
            } catch (const std::exception&) {
                slots[unit].push_back({method, k, config.theta, trial, "error", 1.0});
            }
        }
    });

    ExperimentResult result;
    for (auto& slot : slots) {
        for (auto& row : slot) result.trials.push_back(std::move(row));
    }
    std::sort(result.trials.begin(), result.trials.end(), detail::record_less);

    for (const auto& method : config.methods) {
        for (Index k : config.k_values) {
            std::vector<double> s0, s1;
            for (const auto& row : result.trials) {
                if (row.method != method || row.k != k) continue;
                if (row.metric == "statistic_h0") s0.push_back(row.value);
                if (row.metric == "statistic_h1") s1.push_back(row.value);
            }
            if (s0.empty() || s1.empty()) continue;
            result.summaries.push_back(
                {method, k, config.theta, "summary", "best_cutoff_error", best_cutoff_error(s0, s1), 0.0});
        }
    }
    detail::sort_summaries(result.summaries);
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    return config.kind == ExperimentKind::recovery ? run_recovery_experiment(config) : run_testing_experiment(config);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline void write_csv(std::ostream& out, const ExperimentResult& result) {
    out << "method,k,theta,trial,metric,value\n";
    for (const auto& row : result.trials) {
        out << row.method << ',' << row.k << ',' << format_number(row.theta) << ',' << row.trial_index << ','
            << row.metric << ',' << format_number(row.value) << '\n';
    }
    for (const auto& row : result.summaries) {
        out << row.method << ',' << row.k << ',' << format_number(row.theta) << ',' << row.label << ','
            << row.metric << ',' << format_number(row.value) << '\n';
    }
}

inline std::string to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    write_csv(out, result);
    return out.str();
}

inline void write_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, result);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Config files: `key=value` lines, `#` starts a comment.

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline ConfigMap parse_config_text(std::istream& in) {
    ConfigMap entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParameterError("config line " + std::to_string(line_no) + ": empty key");
        entries[key] = trim(line.substr(eq + 1));
    }
    return entries;
}

inline ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config file '" + path + "'");
    return parse_config_text(in);
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    T value{};
    if (!(in >> value) || !(in >> std::ws).eof()) {
        throw ParameterError("config: bad value '" + text + "' for key '" + key + "'");
    }
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ParameterError("config: bad boolean '" + text + "' for key '" + key + "'");
}

}  // namespace detail

/// Named parameter sets. `figure1` and `figure1_wide` are the full-size
/// recovery sweeps (50 trials); the k grid {5..25} is a reading of the
/// k/sqrt(n) axis range. `figure2` is the hypothesis-testing setting.
/// `desk` is the reduced recovery sweep used by default.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig config;
    if (name == "desk") {
        // lambda = 0.1 at n = d = 625 is sqrt(ln d / n) to within 2%; keep that
        // ratio at the reduced size.
        config.solver_options.lasso.lambda = std::sqrt(std::log(300.0) / 300.0);
        return config;
    }
    if (name == "figure1" || name == "figure1_wide") {
        config.n = 625;
        config.d = name == "figure1" ? 625 : 1250;
        config.k_values = {5, 10, 15, 20, 25};
        config.theta = 3.0;
        config.trials = 50;
        return config;
    }
    if (name == "figure2") {
        config.kind = ExperimentKind::testing;
        config.n = 200;
        config.d = 500;
        config.k_values = {30};
        config.theta = 4.0;
        config.trials = 100;
        config.methods = {"dt", "mdp", "qslr"};
        return config;
    }
    throw ParameterError("unknown preset '" + name + "' (expected desk, figure1, figure1_wide or figure2)");
}

/// Applies `entries` on top of `config`; unknown keys are parameter errors.
inline void apply_config(const ConfigMap& entries, ExperimentConfig& config) {
    using detail::parse_value;
    if (auto it = entries.find("preset"); it != entries.end()) config = preset(it->second);
    for (const auto& [key, value] : entries) {
        if (key == "preset") continue;
        if (key == "kind") {
            if (value == "recovery") config.kind = ExperimentKind::recovery;
            else if (value == "testing") config.kind = ExperimentKind::testing;
            else throw ParameterError("config: kind must be recovery or testing");
        } else if (key == "n") {
            config.n = parse_value<Index>(key, value);
        } else if (key == "d") {
            config.d = parse_value<Index>(key, value);
        } else if (key == "k" || key == "k_values") {
            config.k_values.clear();
            for (const auto& item : detail::split_list(value)) config.k_values.push_back(parse_value<Index>(key, item));
        } else if (key == "theta") {
            config.theta = parse_value<double>(key, value);
        } else if (key == "trials") {
            config.trials = parse_value<int>(key, value);
        } else if (key == "method" || key == "methods") {
            config.methods = detail::split_list(value);
        } else if (key == "solver") {
            config.solver = value;
        } else if (key == "lambda") {
            config.solver_options.lasso.lambda = parse_value<double>(key, value);
        } else if (key == "lambda_rule") {
            if (value == "fixed") config.solver_options.lambda_rule = LambdaRule::fixed;
            else if (value == "plug_in") config.solver_options.lambda_rule = LambdaRule::plug_in;
            else throw ParameterError("config: lambda_rule must be fixed or plug_in");
        } else if (key == "tol") {
            config.solver_options.lasso.tol = parse_value<double>(key, value);
        } else if (key == "max_sweeps") {
            config.solver_options.lasso.max_sweeps = parse_value<int>(key, value);
        } else if (key == "tau") {
            config.tau = parse_value<double>(key, value);
        } else if (key == "epsilon") {
            config.tpower.epsilon = parse_value<double>(key, value);
        } else if (key == "max_iter") {
            config.tpower.max_iter = parse_value<int>(key, value);
        } else if (key == "mdp_grid_points") {
            config.mdp_grid_points = parse_value<int>(key, value);
        } else if (key == "rescale") {
            config.rescale = detail::parse_bool(key, value);
        } else if (key == "seed" || key == "base_seed") {
            config.base_seed = parse_value<Seed>(key, value);
        } else if (key == "out" || key == "out_path") {
            config.out_path = value;
        } else if (key == "threads") {
            config.threads = parse_value<unsigned>(key, value);
        } else {
            throw ParameterError("config: unknown key '" + key + "'");
        }
    }
}

}  // namespace spca_slr

#endif
