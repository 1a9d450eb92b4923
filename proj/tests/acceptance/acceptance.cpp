// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Single-criterion runs: `acceptance 5` or `acceptance 1 7 9`.

#include "oracles.hpp"
#include "spca_slr/spca_slr.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace spca_slr;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

Outcome analytic_oracles() {
    double beta_err = 0.0, sigma_err = 0.0, signal_err = 0.0, sm_err = 0.0, eig_err = 0.0;
    for (int t = 0; t < 100; ++t) {
        Rng rng(trial_seed(1001, static_cast<std::uint64_t>(t)));
        const Index d = 2 + static_cast<Index>(rng.uniform_index(49));
        const Index k = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(std::min<Index>(10, d))));
        const double theta = 1.0 - rng.uniform();  // (0, 1]
        const auto mode = static_cast<SpikeMode>(rng.uniform_index(3));
        const SpikedModel model = make_model(d, k, theta, mode, rng.next_u64());
        const Matrix sigma = population_covariance(model);

        sm_err = std::max(sm_err, (sherman_morrison_inverse(model.spike.u, theta) - sigma.inverse()).cwiseAbs().maxCoeff());
        for (Index i = 0; i < d; ++i) {
            const LinearModelOracle oracle = lmmse_oracle(model, i, OracleCheck::none);
            beta_err = std::max(beta_err, (oracle.beta_star - reference::dense_beta_star(sigma, i)).cwiseAbs().maxCoeff());
            sigma_err = std::max(sigma_err, std::abs(oracle.sigma_sq - reference::dense_sigma_sq(sigma, i)));
            signal_err = std::max(signal_err, std::abs(oracle.signal - reference::dense_signal(sigma, i)));

            const Matrix design_cov = drop_column(drop_column(sigma, i).transpose(), i);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(design_cov, Eigen::EigenvaluesOnly);
            const auto [low, high] = design_eigenvalues(model, i);
            const double lo_ref = d == 2 ? eig.eigenvalues()[0] : eig.eigenvalues().minCoeff();
            eig_err = std::max({eig_err, std::abs(low - lo_ref), std::abs(high - eig.eigenvalues().maxCoeff())});
        }
    }
    const double worst = std::max({beta_err, sigma_err, signal_err, sm_err, eig_err});
    return {worst <= 1e-10, fmt("max abs err: beta %.2e sigma^2 %.2e signal %.2e SM %.2e eig %.2e (tol 1e-10)", beta_err,
                                sigma_err, signal_err, sm_err, eig_err)};
}

Outcome chi_square_null() {
    const Index n = 500, d = 30, k = 5;
    const reference::FixedSupportSolver oracle({0, 1, 2, 3, 4});
    std::vector<double> scaled;
    for (int t = 0; t < 1000; ++t) {
        const SampleMatrix x = sample_null(d, n, trial_seed(2002, static_cast<std::uint64_t>(t)));
        scaled.push_back(static_cast<double>(n) * q_statistic(x, d - 1, oracle, k));
    }
    const double ks = reference::ks_distance(scaled, [](double v) { return reference::chi_squared_cdf(v, 5.0); });
    return {ks < 0.05, fmt("KS distance to chi2_5 = %.4f over 1000 trials (need < 0.05)", ks)};
}

Outcome null_false_alarm() {
    const auto solver = make_solver("l0");
    int accepts = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const SampleMatrix x = sample_null(50, 2000, trial_seed(3003, static_cast<std::uint64_t>(t)));
        const TestResult result = hypothesis_test(x, 3, *solver);
        accepts += result.decision == 0 ? 1 : 0;
        worst = std::max(worst, result.report.q_max() / result.report.threshold);
    }
    return {accepts >= 95, fmt("H0 accepted in %d/100 trials (need >= 95); max Q/threshold = %.3f", accepts, worst)};
}

Outcome exact_recovery() {
    SolverOptions options;
    options.lasso.lambda = 0.1;
    const auto solver = make_solver("lasso_topk", options);
    int exact = 0;
    for (int t = 0; t < 50; ++t) {
        const Seed seed = trial_seed(4004, static_cast<std::uint64_t>(t));
        const SpikedModel model = make_model(100, 5, 3.0, SpikeMode::random_signs, stream_seed(seed, 1));
        const SampleMatrix x = sample_spiked(model, 2000, stream_seed(seed, 2));
        exact += support_recovery(x, 5, *solver).selected == model.spike.support ? 1 : 0;
    }
    return {exact >= 45, fmt("S_hat == S in %d/50 trials (need >= 45)", exact)};
}

double summary_value(const ExperimentResult& result, const std::string& method) {
    for (const auto& s : result.summaries) {
        if (s.method == method) return s.value;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome testing_comparison() {
    ExperimentConfig config = preset("figure2");
    config.threads = 0;
    const ExperimentResult plain = run_experiment(config);
    config.rescale = true;
    config.methods = {"dt", "qslr"};
    const ExperimentResult rescaled = run_experiment(config);

    const double q = summary_value(plain, "qslr");
    const double mdp = summary_value(plain, "mdp");
    const double dt = summary_value(plain, "dt");
    const double q_r = summary_value(rescaled, "qslr");
    const double dt_r = summary_value(rescaled, "dt");
    const bool ok = q <= 0.1 && mdp <= 0.1 && std::abs(dt - q) <= 0.1 && dt_r >= 0.4 && q_r <= 0.2;
    return {ok, fmt("best-cutoff error: Q %.3f, MDP %.3f, DT %.3f (need Q,MDP <= 0.1, |DT-Q| <= 0.1); "
                    "rescaled: DT %.3f (need >= 0.4), Q %.3f (need <= 0.2)",
                    q, mdp, dt, dt_r, q_r)};
}

Outcome recovery_ordering() {
    ExperimentConfig config = preset("desk");
    config.threads = 0;
    const ExperimentResult result = run_experiment(config);
    const Index k_max = config.k_values.back();
    auto mean_at = [&](const std::string& method) {
        for (const auto& s : result.summaries) {
            if (s.method == method && s.k == k_max) return s.value;
        }
        return std::numeric_limits<double>::quiet_NaN();
    };
    const double tp = mean_at("tpower"), q = mean_at("qslr"), ct = mean_at("ct"), dt = mean_at("dt");
    const double slack = 0.05;
    const bool ok = tp >= q - slack && q >= ct - slack && ct >= dt - slack;
    std::ostringstream all;
    for (const auto& s : result.summaries) all << ' ' << s.method << '@' << s.k << '=' << fmt("%.3f", s.value);
    return {ok, fmt("k=%lld mean overlap: tpower %.3f, qslr %.3f, ct %.3f, dt %.3f (each gap >= -0.05);",
                    static_cast<long long>(k_max), tp, q, ct, dt) + all.str()};
}

Outcome solver_properties() {
    const auto lasso = make_solver("lasso_topk");
    const auto omp = make_solver("omp");
    const auto l0 = make_solver("l0");
    int dominated = 0, brute_match = 0;
    for (int t = 0; t < 100; ++t) {
        const Seed seed = trial_seed(7007, static_cast<std::uint64_t>(t));
        const Index p = 12, k = 3;
        const Matrix x = reference::gaussian_matrix(60, p, stream_seed(seed, 1));
        const Vector y = x.leftCols(k) * Vector::LinSpaced(k, 1.0, 2.0) + reference::gaussian_matrix(60, 1, stream_seed(seed, 2));
        const RegressionInstance instance{y, x, k};
        const double best = residual_sum_of_squares(y, x, l0->solve(instance).beta);
        const double slack = 1e-9 * y.squaredNorm();
        if (best <= residual_sum_of_squares(y, x, lasso->solve(instance).beta) + slack &&
            best <= residual_sum_of_squares(y, x, omp->solve(instance).beta) + slack) {
            ++dominated;
        }
        brute_match += std::abs(best - reference::brute_force_best_subset(y, x, k).rss) <= slack ? 1 : 0;
    }

    double kkt = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Seed seed = trial_seed(7008, static_cast<std::uint64_t>(t));
        const Matrix x = reference::gaussian_matrix(200, 50, stream_seed(seed, 1));
        const Vector y = x.col(0) - 0.5 * x.col(3) + reference::gaussian_matrix(200, 1, stream_seed(seed, 2));
        LassoSettings settings;
        settings.lambda = 0.1;
        const LassoFit fit = lasso_coordinate_descent(y, x, settings);
        const Vector grad = x.transpose() * (y - x * fit.beta) / 200.0;
        for (Index j = 0; j < 50; ++j) {
            const double violation = fit.beta[j] != 0.0 ? std::abs(grad[j] - settings.lambda * (fit.beta[j] > 0 ? 1.0 : -1.0))
                                                        : std::max(0.0, std::abs(grad[j]) - settings.lambda);
            kkt = std::max(kkt, violation);
        }
    }

    int omp_exact = 0;
    for (int t = 0; t < 20; ++t) {
        const Seed seed = trial_seed(7009, static_cast<std::uint64_t>(t));
        const Matrix x = reference::orthogonal_design(80, 30, stream_seed(seed, 1));
        Rng rng(stream_seed(seed, 2));
        const IndexSet support = rng.subset<Index>(30, 4);
        Vector beta = Vector::Zero(30);
        for (Index j : support) beta[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
        const SparseCoefficients fit = omp->solve({x * beta, x, 4});
        omp_exact += fit.support == support && (fit.beta - beta).cwiseAbs().maxCoeff() <= 1e-6 ? 1 : 0;
    }
    const bool ok = dominated == 100 && brute_match == 100 && kkt <= 1e-6 && omp_exact == 20;
    return {ok, fmt("l0 dominance %d/100, l0 = brute force %d/100, max Lasso KKT violation %.2e (tol 1e-6), "
                    "OMP exact on orthogonal designs %d/20",
                    dominated, brute_match, kkt, omp_exact)};
}

Outcome restricted_eigenvalue() {
    int passes = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 100; ++t) {
        const Seed seed = trial_seed(8008, static_cast<std::uint64_t>(t));
        const SpikedModel model = make_model(100, 5, 1.0, SpikeMode::random_signs, stream_seed(seed, 1));
        const SampleMatrix x = sample_spiked(model, 500, stream_seed(seed, 2));
        const Matrix design = drop_column(x.data, model.spike.support[0]);
        const double probe = restricted_eigenvalue_probe(design, 5, 500, stream_seed(seed, 3));
        lowest = std::min(lowest, probe);
        passes += probe >= 0.125 ? 1 : 0;
    }
    return {passes >= 95, fmt("probe >= 1/8 in %d/100 trials (need >= 95); lowest probe %.3f", passes, lowest)};
}

Outcome determinism() {
    ExperimentConfig recovery = preset("desk");
    recovery.n = 120;
    recovery.d = 100;
    recovery.trials = 4;
    ExperimentConfig testing_config = preset("figure2");
    testing_config.n = 100;
    testing_config.d = 80;
    testing_config.k_values = {6};
    testing_config.trials = 4;
    bool ok = true;
    for (ExperimentConfig config : {recovery, testing_config}) {
        config.threads = 1;
        const std::string serial = to_csv(run_experiment(config));
        const std::string again = to_csv(run_experiment(config));
        config.threads = 4;
        const std::string parallel = to_csv(run_experiment(config));
        ok = ok && serial == again && serial == parallel;
    }
    return {ok, ok ? "recovery and testing CSVs byte-identical across reruns and threads=1/4" : "CSV mismatch"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"analytic oracles", analytic_oracles},
        {"chi-square null distribution", chi_square_null},
        {"H0 false-alarm bound", null_false_alarm},
        {"exact support recovery", exact_recovery},
        {"hypothesis-testing comparison", testing_comparison},
        {"recovery ordering at desk scale", recovery_ordering},
        {"solver properties", solver_properties},
        {"restricted eigenvalue probe", restricted_eigenvalue},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int a = 1; a < argc; ++a) selected.insert(std::stoi(argv[a]));

    int failures = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        const int id = static_cast<int>(c) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[c].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] AC%d %s (%.1fs): %s\n", outcome.passed ? "PASS" : "FAIL", id, criteria[c].first.c_str(), seconds,
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
