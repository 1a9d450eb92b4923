#ifndef SPCA_SLR_SLR_HPP
#define SPCA_SLR_SLR_HPP

// Sparse linear regression black-boxes: (y, X, k) -> k-sparse beta.
//
// Solvers never standardize columns; scaling is left to the caller.

#include "spca_slr/errors.hpp"
#include "spca_slr/rng.hpp"
#include "spca_slr/types.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <string_view>

namespace spca_slr {

struct RegressionInstance {
    Vector y;
    Matrix x;
    Index k = 1;

    Index n() const { return x.rows(); }
    Index p() const { return x.cols(); }

    void validate() const {
        detail::require(x.rows() >= 1 && x.cols() >= 1, "regression instance: empty design");
        detail::require(y.size() == x.rows(), "regression instance: y length must equal design rows");
        detail::require(k >= 1 && k <= x.cols(), "regression instance: need 1 <= k <= p");
        detail::require(y.allFinite() && x.allFinite(), "regression instance: non-finite entry");
    }
};

/// Coefficients with an explicit ascending support; beta_j == 0 off support.
struct SparseCoefficients {
    Vector beta;
    IndexSet support;

    Index nnz() const { return static_cast<Index>(support.size()); }
};

/// Residual sum of squares ||y - X beta||^2.
inline double residual_sum_of_squares(const Vector& y, const Matrix& x, const Vector& beta) {
    return (y - x * beta).squaredNorm();
}

// ---------------------------------------------------------------------------
// Lasso

struct LassoSettings {
    double lambda = 0.1;
    double tol = 1e-6;
    int max_sweeps = 1000;
};

struct LassoFit {
    Vector beta;
    int sweeps = 0;
    bool converged = false;
};

/// Cyclic coordinate descent for (1/(2n)) ||y - X beta||^2 + lambda ||beta||_1,
/// starting from zero. Full sweeps alternate with sweeps over the current
/// nonzeros; convergence is declared when a full sweep changes no coefficient
/// by more than tol. Every sweep, full or active-set, counts toward max_sweeps.
inline LassoFit lasso_coordinate_descent(const Vector& y, const Matrix& x, const LassoSettings& settings) {
    detail::require(y.size() == x.rows(), "lasso: y length must equal design rows");
    detail::require(settings.lambda >= 0.0, "lasso: lambda must be nonnegative");
    detail::require(settings.tol > 0.0 && settings.max_sweeps >= 1, "lasso: bad convergence settings");
    const Index n = x.rows();
    const Index p = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Vector col_sq = x.colwise().squaredNorm().transpose() * inv_n;

    LassoFit fit;
    fit.beta = Vector::Zero(p);
    Vector residual = y;
    std::vector<Index> active;

    auto update = [&](Index j) {
        if (col_sq[j] == 0.0) return 0.0;
        const double old = fit.beta[j];
        const double rho = x.col(j).dot(residual) * inv_n + col_sq[j] * old;
        const double fresh = soft_threshold(rho, settings.lambda) / col_sq[j];
        const double delta = fresh - old;
        if (delta != 0.0) {
            residual.noalias() -= delta * x.col(j);
            fit.beta[j] = fresh;
        }
        return std::abs(delta);
    };

    while (fit.sweeps < settings.max_sweeps) {
        double full_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            full_change = std::max(full_change, update(j));
        }
        ++fit.sweeps;
        if (full_change <= settings.tol) {
            fit.converged = true;
            break;
        }
        active.clear();
        for (Index j = 0; j < p; ++j) {
            if (fit.beta[j] != 0.0) active.push_back(j);
        }
        while (fit.sweeps < settings.max_sweeps) {
            double change = 0.0;
            for (Index j : active) {
                change = std::max(change, update(j));
            }
            ++fit.sweeps;
            if (change <= settings.tol) break;
        }
    }
    return fit;
}

/// Keeps the k largest-magnitude nonzero entries; ties toward the lower index.
inline SparseCoefficients hard_threshold_topk(const Vector& beta, Index k) {
    detail::require(k >= 0, "hard_threshold_topk: k must be nonnegative");
    const Index nonzeros = (beta.array() != 0.0).count();
    SparseCoefficients out;
    out.support = top_k_indices(beta.cwiseAbs(), std::min(k, nonzeros));
    out.beta = Vector::Zero(beta.size());
    for (Index j : out.support) {
        out.beta[j] = beta[j];
    }
    return out;
}

/// Least squares on the columns `support`; min-norm solution when rank deficient.
inline Vector least_squares_on_support(const Vector& y, const Matrix& x, const IndexSet& support) {
    Matrix sub(x.rows(), static_cast<Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        sub.col(static_cast<Index>(s)) = x.col(support[s]);
    }
    const Vector local = sub.completeOrthogonalDecomposition().solve(y);
    Vector beta = Vector::Zero(x.cols());
    for (std::size_t s = 0; s < support.size(); ++s) {
        beta[support[s]] = local[static_cast<Index>(s)];
    }
    return beta;
}

// ---------------------------------------------------------------------------
// Solver interface

class SlrSolver {
public:
    virtual ~SlrSolver() = default;
    virtual std::string_view name() const = 0;
    /// Must be deterministic and reentrant; output has at most instance.k nonzeros.
    virtual SparseCoefficients solve(const RegressionInstance& instance) const = 0;
};

enum class LambdaRule {
    fixed,    ///< use LassoSettings::lambda as given
    plug_in,  ///< 4 sigma_hat sqrt(ln p / n), sigma_hat = sqrt(||y||^2 / n)
};

inline double plug_in_lambda(const Vector& y, Index p) {
    const auto n = static_cast<double>(y.size());
    const double sigma_hat = std::sqrt(y.squaredNorm() / n);
    return 4.0 * sigma_hat * std::sqrt(std::log(static_cast<double>(std::max<Index>(p, 2))) / n);
}

inline SparseCoefficients solve_thresholded_lasso(const RegressionInstance& instance, const LassoSettings& settings) {
    instance.validate();
    const LassoFit fit = lasso_coordinate_descent(instance.y, instance.x, settings);
    return hard_threshold_topk(fit.beta, instance.k);
}

inline SparseCoefficients solve_thresholded_lasso(const RegressionInstance& instance, double lambda) {
    LassoSettings settings;
    settings.lambda = lambda;
    return solve_thresholded_lasso(instance, settings);
}

class ThresholdedLassoSolver final : public SlrSolver {
public:
    explicit ThresholdedLassoSolver(LassoSettings settings = {}, LambdaRule rule = LambdaRule::fixed)
        : settings_(settings), rule_(rule) {}

    std::string_view name() const override { return "lasso_topk"; }

    SparseCoefficients solve(const RegressionInstance& instance) const override {
        LassoSettings settings = settings_;
        if (rule_ == LambdaRule::plug_in) {
            settings.lambda = plug_in_lambda(instance.y, instance.p());
        }
        return solve_thresholded_lasso(instance, settings);
    }

    const LassoSettings& settings() const { return settings_; }

private:
    LassoSettings settings_;
    LambdaRule rule_;
};

// ---------------------------------------------------------------------------
// Orthogonal matching pursuit

struct OmpTrace {
    std::vector<double> residual_norms;  ///< ||y - X beta|| after each selection, starting with ||y||
};

/// k greedy selections by |x_j^T r| / ||x_j|| (lowest index on ties), each
/// followed by a least-squares refit on the selected set. Stops early when
/// no unselected column has nonzero correlation with the residual.
inline SparseCoefficients solve_omp(const RegressionInstance& instance, OmpTrace* trace = nullptr) {
    instance.validate();
    const Matrix& x = instance.x;
    const Vector col_norms = x.colwise().norm().transpose();
    const double scale = std::max(1.0, instance.y.norm());

    SparseCoefficients out;
    out.beta = Vector::Zero(instance.p());
    Vector residual = instance.y;
    std::vector<bool> chosen(static_cast<std::size_t>(instance.p()), false);
    if (trace) trace->residual_norms.assign(1, residual.norm());

    for (Index step = 0; step < instance.k; ++step) {
        const Vector correlation = x.transpose() * residual;
        Index best = -1;
        double best_score = 0.0;
        for (Index j = 0; j < instance.p(); ++j) {
            if (chosen[static_cast<std::size_t>(j)] || col_norms[j] == 0.0) continue;
            const double score = std::abs(correlation[j]) / col_norms[j];
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        if (best < 0 || best_score <= 1e-13 * scale) break;
        chosen[static_cast<std::size_t>(best)] = true;
        out.support.insert(std::upper_bound(out.support.begin(), out.support.end(), best), best);
        out.beta = least_squares_on_support(instance.y, x, out.support);
        residual = instance.y - x * out.beta;
        if (trace) trace->residual_norms.push_back(residual.norm());
    }
    return out;
}

class OmpSolver final : public SlrSolver {
public:
    std::string_view name() const override { return "omp"; }
    SparseCoefficients solve(const RegressionInstance& instance) const override { return solve_omp(instance); }
};

// ---------------------------------------------------------------------------
// Exact l0 (best subset)

inline double binomial(Index p, Index k) {
    if (k < 0 || k > p) return 0.0;
    double value = 1.0;
    for (Index j = 1; j <= k; ++j) {
        value = value * static_cast<double>(p - k + j) / static_cast<double>(j);
    }
    return std::round(value);
}

constexpr double kMaxL0Subsets = 1e6;

namespace detail {

// In-place Cholesky of the leading m x m block of `a` (row-major, stride m);
// returns false when a pivot is not safely positive.
inline bool small_cholesky(std::vector<double>& a, Index m) {
    for (Index c = 0; c < m; ++c) {
        double diag = a[c * m + c];
        for (Index t = 0; t < c; ++t) diag -= a[c * m + t] * a[c * m + t];
        if (!(diag > 1e-12 * std::max(1.0, std::abs(a[c * m + c])))) return false;
        const double root = std::sqrt(diag);
        a[c * m + c] = root;
        for (Index r = c + 1; r < m; ++r) {
            double v = a[r * m + c];
            for (Index t = 0; t < c; ++t) v -= a[r * m + t] * a[c * m + t];
            a[r * m + c] = v / root;
        }
    }
    return true;
}

}  // namespace detail

/// Global minimizer of ||y - X beta||^2 over all supports of size exactly k
/// (lexicographically smallest support on ties). Guarded by C(p, k) <= 1e6.
inline SparseCoefficients solve_l0_exact(const RegressionInstance& instance) {
    instance.validate();
    const Index p = instance.p();
    const Index k = instance.k;
    if (binomial(p, k) > kMaxL0Subsets) {
        throw CapacityError("solve_l0_exact: C(" + std::to_string(p) + ", " + std::to_string(k) +
                            ") exceeds the enumeration limit");
    }
    const Matrix gram = instance.x.transpose() * instance.x;
    const Vector xty = instance.x.transpose() * instance.y;
    const double yty = instance.y.squaredNorm();

    IndexSet current(static_cast<std::size_t>(k));
    std::iota(current.begin(), current.end(), Index{0});
    IndexSet best_support;
    double best_rss = std::numeric_limits<double>::infinity();
    std::vector<double> factor(static_cast<std::size_t>(k * k));
    std::vector<double> rhs(static_cast<std::size_t>(k));

    while (true) {
        for (Index r = 0; r < k; ++r) {
            for (Index c = 0; c < k; ++c) factor[r * k + c] = gram(current[r], current[c]);
            rhs[r] = xty[current[r]];
        }
        double rss;
        if (detail::small_cholesky(factor, k)) {
            // rss = y^T y - b^T G^{-1} b = y^T y - ||L^{-1} b||^2
            double explained = 0.0;
            for (Index r = 0; r < k; ++r) {
                double v = rhs[r];
                for (Index t = 0; t < r; ++t) v -= factor[r * k + t] * rhs[t];
                rhs[r] = v / factor[r * k + r];
                explained += rhs[r] * rhs[r];
            }
            rss = yty - explained;
        } else {
            rss = residual_sum_of_squares(instance.y, instance.x,
                                          least_squares_on_support(instance.y, instance.x, current));
        }
        if (rss < best_rss) {
            best_rss = rss;
            best_support = current;
        }
        // Advance to the next combination in lexicographic order.
        Index pos = k - 1;
        while (pos >= 0 && current[pos] == p - k + pos) --pos;
        if (pos < 0) break;
        ++current[pos];
        for (Index t = pos + 1; t < k; ++t) current[t] = current[t - 1] + 1;
    }

    SparseCoefficients out;
    out.beta = least_squares_on_support(instance.y, instance.x, best_support);
    for (Index j : best_support) {
        if (out.beta[j] != 0.0) out.support.push_back(j);
    }
    return out;
}

class L0Solver final : public SlrSolver {
public:
    std::string_view name() const override { return "l0"; }
    SparseCoefficients solve(const RegressionInstance& instance) const override { return solve_l0_exact(instance); }
};

// ---------------------------------------------------------------------------
// Registry

struct SolverOptions {
    LassoSettings lasso;
    LambdaRule lambda_rule = LambdaRule::fixed;
};

inline std::unique_ptr<SlrSolver> make_solver(std::string_view name, const SolverOptions& options = {}) {
    if (name == "lasso_topk") return std::make_unique<ThresholdedLassoSolver>(options.lasso, options.lambda_rule);
    if (name == "omp") return std::make_unique<OmpSolver>();
    if (name == "l0") return std::make_unique<L0Solver>();
    throw ParameterError("unknown solver '" + std::string(name) + "' (expected lasso_topk, omp or l0)");
}

// ---------------------------------------------------------------------------
// Diagnostics

/// (1/n) ||X (beta_hat - beta_star)||^2.
inline double prediction_error(const Matrix& x, const Vector& beta_hat, const Vector& beta_star) {
    detail::require(beta_hat.size() == x.cols() && beta_star.size() == x.cols(),
                    "prediction_error: coefficient length must equal design columns");
    return (x * (beta_hat - beta_star)).squaredNorm() / static_cast<double>(x.rows());
}

/// Upper estimate of the restricted eigenvalue constant
///   gamma(X) = min over the cones C(S) of (1/n) ||X b||^2 / ||b||^2.
/// Takes the minimum of
///   (a) lambda_min((1/n) X_S^T X_S) over every size-k support S, when C(p, k) <= 1e4;
///   (b) the Rayleigh quotient of `n_directions` random cone members with
///       ||b_{S^c}||_1 = 3 ||b_S||_1 on a random size-k S.
/// Exact computation is NP-hard; this only bounds gamma(X) from above.
inline double restricted_eigenvalue_probe(const Matrix& x, Index k, Index n_directions, Seed seed) {
    const Index p = x.cols();
    detail::require(k >= 1 && k <= p, "restricted_eigenvalue_probe: need 1 <= k <= p");
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    double probe = std::numeric_limits<double>::infinity();

    if (binomial(p, k) <= 1e4) {
        const Matrix gram = x.transpose() * x * inv_n;
        IndexSet current(static_cast<std::size_t>(k));
        std::iota(current.begin(), current.end(), Index{0});
        Matrix block(k, k);
        while (true) {
            for (Index r = 0; r < k; ++r) {
                for (Index c = 0; c < k; ++c) block(r, c) = gram(current[r], current[c]);
            }
            Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
            probe = std::min(probe, std::max(0.0, eig.eigenvalues()[0]));
            Index pos = k - 1;
            while (pos >= 0 && current[pos] == p - k + pos) --pos;
            if (pos < 0) break;
            ++current[pos];
            for (Index t = pos + 1; t < k; ++t) current[t] = current[t - 1] + 1;
        }
    }

    Rng rng(seed);
    Vector beta(p);
    for (Index draw = 0; draw < n_directions; ++draw) {
        const IndexSet support = rng.subset<Index>(p, k);
        beta.setZero();
        double inside_l1 = 0.0;
        for (Index j : support) {
            beta[j] = rng.normal();
            inside_l1 += std::abs(beta[j]);
        }
        if (k < p && inside_l1 > 0.0) {
            Vector outside(p - k);
            for (Index j = 0; j < p - k; ++j) outside[j] = rng.normal();
            const double outside_l1 = outside.cwiseAbs().sum();
            if (outside_l1 > 0.0) {
                outside *= 3.0 * inside_l1 / outside_l1;
                Index slot = 0;
                std::size_t s = 0;
                for (Index j = 0; j < p; ++j) {
                    if (s < support.size() && support[s] == j) {
                        ++s;
                        continue;
                    }
                    beta[j] = outside[slot++];
                }
            }
        }
        const double norm_sq = beta.squaredNorm();
        if (norm_sq == 0.0) continue;
        probe = std::min(probe, (x * beta).squaredNorm() * inv_n / norm_sq);
    }
    return probe;
}

}  // namespace spca_slr

#endif
