#ifndef SPCA_SLR_TOOLS_SELFCHECK_HPP
#define SPCA_SLR_TOOLS_SELFCHECK_HPP

// Quick self-checks behind `spca_slr verify`.

#include "spca_slr/spca_slr.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

namespace spca_slr::selfcheck {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline Check analytic_oracle() {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        Rng rng(trial_seed(101, static_cast<std::uint64_t>(t)));
        const Index d = 5 + static_cast<Index>(rng.uniform_index(40));
        const Index k = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(d - 1)));
        const double theta = 0.1 + 5.0 * rng.uniform();
        const SpikedModel model = make_model(d, k, theta, SpikeMode::random_sphere, rng.next_u64());
        for (Index i = 0; i < d; ++i) worst = std::max(worst, lmmse_oracle(model, i).verification_error);
    }
    return {"analytic_oracle", worst <= 1e-10, "max |beta_closed - beta_dense| = " + format_number(worst)};
}

inline Check sherman_morrison() {
    const SpikedModel model = make_model(30, 6, 2.5, SpikeMode::random_signs, 7);
    const Matrix inverse = sherman_morrison_inverse(model.spike.u, model.theta);
    const double err = (inverse * population_covariance(model) - Matrix::Identity(30, 30)).cwiseAbs().maxCoeff();
    return {"sherman_morrison", err <= 1e-12, "max |A^-1 A - I| = " + format_number(err)};
}

/// n Q over a support fixed in advance is chi-square with k degrees of
/// freedom under the null.
inline Check null_chi_square() {
    const Index n = 400, d = 20, k = 4;
    const int trials = 1000;
    const IndexSet support{0, 1, 2, 3};
    std::vector<double> scaled;
    scaled.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        const SampleMatrix x = sample_null(d, n, trial_seed(202, static_cast<std::uint64_t>(t)));
        const RegressionInstance instance = coordinate_instance(x, d - 1, k);
        const Vector beta = least_squares_on_support(instance.y, instance.x, support);
        scaled.push_back(static_cast<double>(n) * q_value(instance.y, instance.x, beta));
    }
    std::sort(scaled.begin(), scaled.end());
    double ks = 0.0;
    for (std::size_t j = 0; j < scaled.size(); ++j) {
        const double f = boost::math::gamma_p(k / 2.0, scaled[j] / 2.0);
        ks = std::max({ks, std::abs(f - static_cast<double>(j) / trials), std::abs(static_cast<double>(j + 1) / trials - f)});
    }
    return {"null_chi_square", ks < 0.05, "KS distance = " + format_number(ks)};
}

/// The exact l0 solver never loses to the heuristics on the same instance.
inline Check l0_dominance() {
    const auto lasso = make_solver("lasso_topk");
    const auto omp = make_solver("omp");
    const auto l0 = make_solver("l0");
    int wins = 0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
        const SpikedModel model = make_model(16, 3, 3.0, SpikeMode::random_signs, trial_seed(303, static_cast<std::uint64_t>(t)));
        const SampleMatrix x = sample_spiked(model, 100, trial_seed(304, static_cast<std::uint64_t>(t)));
        const RegressionInstance instance = coordinate_instance(x, model.spike.support.front(), 3);
        const double best = residual_sum_of_squares(instance.y, instance.x, l0->solve(instance).beta);
        const double slack = 1e-9 * instance.y.squaredNorm();
        const bool ok = best <= residual_sum_of_squares(instance.y, instance.x, lasso->solve(instance).beta) + slack &&
                        best <= residual_sum_of_squares(instance.y, instance.x, omp->solve(instance).beta) + slack;
        wins += ok ? 1 : 0;
    }
    return {"l0_dominance", wins == trials, std::to_string(wins) + "/" + std::to_string(trials) + " instances"};
}

inline Check harness_determinism() {
    ExperimentConfig config;
    config.n = 60;
    config.d = 30;
    config.k_values = {3};
    config.trials = 4;
    config.threads = 1;
    const std::string first = to_csv(run_experiment(config));
    config.threads = 3;
    const bool same = first == to_csv(run_experiment(config));
    return {"harness_determinism", same, same ? "threads=1 and threads=3 byte-identical" : "CSV differs"};
}

inline std::vector<std::function<Check()>> all_checks() {
    return {analytic_oracle, sherman_morrison, null_chi_square, l0_dominance, harness_determinism};
}

}  // namespace spca_slr::selfcheck

#endif
