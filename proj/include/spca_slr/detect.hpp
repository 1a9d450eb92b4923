#ifndef SPCA_SLR_DETECT_HPP
#define SPCA_SLR_DETECT_HPP

// Per-coordinate Q statistics and the detectors built on them.
//
// For coordinate i the column X_i is regressed on the remaining columns by
// an arbitrary SLR black-box with sparsity budget k, and
//
//   Q_i = (1/n) ||X_i||^2 - (1/n) ||X_i - X_{-i} beta_hat||^2
//
// measures how much of X_i the other coordinates explain.

#include "spca_slr/errors.hpp"
#include "spca_slr/parallel.hpp"
#include "spca_slr/sampler.hpp"
#include "spca_slr/slr.hpp"
#include "spca_slr/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spca_slr {

struct QReport {
    Vector q;                 ///< NaN for coordinates skipped by a short-circuited test
    double threshold = 0.0;
    std::vector<bool> exceed;  ///< q_i > threshold, strict
    std::string solver_name;
    Index k = 0;

    Index exceed_count() const { return std::count(exceed.begin(), exceed.end(), true); }
    /// Largest evaluated Q value (NaN entries ignored).
    double q_max() const {
        double best = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < q.size(); ++i) {
            if (!std::isnan(q[i])) best = std::max(best, q[i]);
        }
        return best;
    }
};

/// (1/n) ||y||^2 - (1/n) ||y - X beta||^2.
inline double q_value(const Vector& y, const Matrix& x, const Vector& beta) {
    const auto n = static_cast<double>(y.size());
    return (y.squaredNorm() - residual_sum_of_squares(y, x, beta)) / n;
}

/// Regression instance for coordinate i: y = X_i, design = X_{-i}.
inline RegressionInstance coordinate_instance(const SampleMatrix& x, Index i, Index k) {
    return RegressionInstance{x.data.col(i), drop_column(x.data, i), k};
}

inline double q_statistic(const SampleMatrix& x, Index i, const SlrSolver& solver, Index k) {
    detail::require(i >= 0 && i < x.d(), "q_statistic: coordinate out of range");
    detail::require(k >= 1 && k <= x.d() - 1, "q_statistic: need 1 <= k <= d-1");
    const RegressionInstance instance = coordinate_instance(x, i, k);
    const SparseCoefficients fit = solver.solve(instance);
    return q_value(instance.y, instance.x, fit.beta);
}

/// 13 k ln(d/k) / n, clamped below at 13 k / n (the d/k >= e regime).
inline double q_threshold(Index n, Index d, Index k) {
    detail::require(n >= 1 && d >= 1 && k >= 1, "q_threshold: n, d, k must be positive");
    detail::require(k < d, "q_threshold: need k < d");
    const double scale = 13.0 * static_cast<double>(k) / static_cast<double>(n);
    return scale * std::max(1.0, std::log(static_cast<double>(d) / static_cast<double>(k)));
}

namespace detail {

inline QReport empty_report(const SampleMatrix& x, Index k, const SlrSolver& solver) {
    QReport report;
    report.q = Vector::Constant(x.d(), std::numeric_limits<double>::quiet_NaN());
    report.threshold = q_threshold(x.n(), x.d(), k);
    report.exceed.assign(static_cast<std::size_t>(x.d()), false);
    report.solver_name = std::string(solver.name());
    report.k = k;
    return report;
}

inline void validate_detector_input(const SampleMatrix& x, Index k) {
    x.validate();
    require(k >= 1 && k <= x.d() - 1, "detector: need 1 <= k <= d-1");
}

}  // namespace detail

/// All d Q values. The per-coordinate solves run on up to `threads` workers
/// (0 = hardware concurrency) and write disjoint slots.
inline QReport compute_q_report(const SampleMatrix& x, Index k, const SlrSolver& solver, unsigned threads = 1) {
    detail::validate_detector_input(x, k);
    QReport report = detail::empty_report(x, k, solver);
    parallel_for(static_cast<std::size_t>(x.d()), threads, [&](std::size_t i) {
        report.q[static_cast<Index>(i)] = q_statistic(x, static_cast<Index>(i), solver, k);
    });
    for (Index i = 0; i < x.d(); ++i) {
        report.exceed[static_cast<std::size_t>(i)] = report.q[i] > report.threshold;
    }
    return report;
}

enum class TestMode {
    short_circuit,  ///< stop at the first exceedance
    full,           ///< evaluate every coordinate
};

struct TestResult {
    int decision = 0;
    QReport report;
};

/// Returns 1 iff some Q_i exceeds q_threshold(n, d, k).
inline TestResult hypothesis_test(const SampleMatrix& x, Index k, const SlrSolver& solver,
                                  TestMode mode = TestMode::short_circuit, unsigned threads = 1) {
    TestResult result;
    if (mode == TestMode::full) {
        result.report = compute_q_report(x, k, solver, threads);
        result.decision = result.report.exceed_count() > 0 ? 1 : 0;
        return result;
    }
    detail::validate_detector_input(x, k);
    result.report = detail::empty_report(x, k, solver);
    for (Index i = 0; i < x.d(); ++i) {
        const double q = q_statistic(x, i, solver, k);
        result.report.q[i] = q;
        if (q > result.report.threshold) {
            result.report.exceed[static_cast<std::size_t>(i)] = true;
            result.decision = 1;
            break;
        }
    }
    return result;
}

struct RecoveryResult {
    IndexSet selected;  ///< ascending
    QReport report;
};

/// S_hat = { i : Q_i > threshold }, of any size.
inline RecoveryResult support_recovery(const SampleMatrix& x, Index k, const SlrSolver& solver, unsigned threads = 1) {
    RecoveryResult result;
    result.report = compute_q_report(x, k, solver, threads);
    for (Index i = 0; i < x.d(); ++i) {
        if (result.report.exceed[static_cast<std::size_t>(i)]) result.selected.push_back(i);
    }
    return result;
}

/// The k coordinates with the largest Q (ties toward the lower index).
inline RecoveryResult recover_topk(const SampleMatrix& x, Index k, const SlrSolver& solver, unsigned threads = 1) {
    RecoveryResult result;
    result.report = compute_q_report(x, k, solver, threads);
    result.selected = top_k_indices(result.report.q, k);
    return result;
}

struct AdaptiveResult {
    Index k = 1;       ///< budget at which the search stopped
    int decision = 0;  ///< 1 iff that level had any exceedance
    Index exceedances = 0;
    std::vector<Index> levels;  ///< every budget tried, in order
};

/// Unknown-sparsity search: k' = k_init, k_init/2, ... (floor, minimum 1).
/// Stops at the first level with at least k' coordinates above
/// q_threshold(n, d, k'), or at k' = 1.
inline AdaptiveResult adaptive_sparsity(const SampleMatrix& x, Index k_init, const SlrSolver& solver,
                                        unsigned threads = 1) {
    x.validate();
    detail::require(k_init >= 1, "adaptive_sparsity: k_init must be positive");
    AdaptiveResult result;
    Index level = std::min(k_init, x.d() - 1);
    while (true) {
        result.levels.push_back(level);
        const QReport report = compute_q_report(x, level, solver, threads);
        result.k = level;
        result.exceedances = report.exceed_count();
        result.decision = result.exceedances > 0 ? 1 : 0;
        if (result.exceedances >= level || level == 1) break;
        level = std::max<Index>(1, level / 2);
    }
    return result;
}

}  // namespace spca_slr

#endif
