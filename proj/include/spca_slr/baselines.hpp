#ifndef SPCA_SLR_BASELINES_HPP
#define SPCA_SLR_BASELINES_HPP

// Classical sparse PCA baselines used for comparison: diagonal thresholding,
// covariance thresholding, the truncated power method and the minimal dual
// perturbation (MDP) detection statistic. All top-k selections break ties
// toward the lower index.

#include "spca_slr/errors.hpp"
#include "spca_slr/sampler.hpp"
#include "spca_slr/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spca_slr {

struct BaselineResult {
    std::string method;
    IndexSet selected;
    double statistic = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = true;
};

// ---------------------------------------------------------------------------
// Eigen helpers

struct EigenPair {
    double value = 0.0;
    Vector vector;
};

/// Algebraically largest eigenpair of a symmetric matrix.
inline EigenPair leading_eigenpair(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("leading_eigenpair: eigensolver did not converge (dimension " +
                             std::to_string(symmetric.rows()) + ")");
    }
    const Index last = symmetric.rows() - 1;
    return {eig.eigenvalues()[last], eig.eigenvectors().col(last)};
}

inline double largest_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("largest_eigenvalue: eigensolver did not converge");
    }
    return eig.eigenvalues()[symmetric.rows() - 1];
}

// ---------------------------------------------------------------------------
// Diagonal thresholding

inline BaselineResult diagonal_thresholding(const SampleMatrix& x, Index k) {
    detail::require(k >= 1 && k <= x.d(), "diagonal_thresholding: need 1 <= k <= d");
    BaselineResult result;
    result.method = "dt";
    const Vector variances = column_second_moments(x);
    result.selected = top_k_indices(variances, k);
    result.statistic = variances.maxCoeff();
    return result;
}

/// Largest sample variance.
inline double dt_statistic(const SampleMatrix& x) { return column_second_moments(x).maxCoeff(); }

// ---------------------------------------------------------------------------
// Covariance thresholding

/// Soft-thresholds the off-diagonal entries of Sigma_hat - I at tau / sqrt(n),
/// keeps the diagonal of Sigma_hat - I, and selects the k largest absolute
/// loadings of the top eigenvector. Single-spike form of the scheme of
/// Deshpande and Montanari.
inline BaselineResult covariance_thresholding(const SampleMatrix& x, Index k, double tau = 4.0) {
    detail::require(k >= 1 && k <= x.d(), "covariance_thresholding: need 1 <= k <= d");
    detail::require(tau >= 0.0, "covariance_thresholding: tau must be nonnegative");
    Matrix shifted = empirical_covariance(x);
    shifted.diagonal().array() -= 1.0;
    const double level = tau / std::sqrt(static_cast<double>(x.n()));
    for (Index c = 0; c < shifted.cols(); ++c) {
        for (Index r = 0; r < shifted.rows(); ++r) {
            if (r != c) shifted(r, c) = soft_threshold(shifted(r, c), level);
        }
    }
    BaselineResult result;
    result.method = "ct";
    const EigenPair top = leading_eigenpair(shifted);
    result.selected = top_k_indices(top.vector.cwiseAbs(), k);
    result.statistic = top.value;
    return result;
}

// ---------------------------------------------------------------------------
// Truncated power method

struct TpowerSettings {
    double epsilon = 0.01;  ///< stop when ||v_t - v_{t-1}||_2 < epsilon
    int max_iter = 1000;
};

struct TpowerResult {
    Vector v;
    IndexSet selected;
    int iterations = 0;
    bool converged = false;
    std::vector<double> rayleigh;  ///< v^T Sigma v after each iterate, starting with the initial vector
};

/// Normalized indicator of the k largest diagonal entries. Scale sensitive:
/// after rescaling to unit variances it degenerates to the tie rule.
inline Vector tpower_default_init(const Matrix& sigma_hat, Index k) {
    Vector v = Vector::Zero(sigma_hat.rows());
    for (Index j : top_k_indices(sigma_hat.diagonal(), k)) v[j] = 1.0;
    return v / std::sqrt(static_cast<double>(std::min(k, sigma_hat.rows())));
}

/// v <- normalize(truncate_k(Sigma v)) from `init` (default: tpower_default_init).
inline TpowerResult truncated_power_method(const Matrix& sigma_hat, Index k, const TpowerSettings& settings = {},
                                           const Vector* init = nullptr) {
    const Index d = sigma_hat.rows();
    detail::require(sigma_hat.cols() == d, "truncated_power_method: matrix must be square");
    detail::require(k >= 1 && k <= d, "truncated_power_method: need 1 <= k <= d");
    TpowerResult result;
    result.v = init ? *init : tpower_default_init(sigma_hat, k);
    detail::require(result.v.size() == d && result.v.norm() > 0.0, "truncated_power_method: bad initial vector");
    result.v.normalize();
    result.rayleigh.push_back(result.v.dot(sigma_hat * result.v));

    while (result.iterations < settings.max_iter) {
        const Vector product = sigma_hat * result.v;
        Vector next = Vector::Zero(d);
        for (Index j : top_k_indices(product.cwiseAbs(), k)) next[j] = product[j];
        const double norm = next.norm();
        if (norm == 0.0) break;
        next /= norm;
        const double step = (next - result.v).norm();
        result.v = std::move(next);
        ++result.iterations;
        result.rayleigh.push_back(result.v.dot(sigma_hat * result.v));
        if (step < settings.epsilon) {
            result.converged = true;
            break;
        }
    }
    result.selected = top_k_indices(result.v.cwiseAbs(), k);
    return result;
}

// ---------------------------------------------------------------------------
// Minimal dual perturbation

/// 30 log-spaced points in [0.01, 2] * sqrt(ln d / n).
inline std::vector<double> mdp_default_grid(Index n, Index d, int points = 30) {
    detail::require(points >= 2, "mdp_default_grid: need at least two points");
    const double unit = std::sqrt(std::log(static_cast<double>(std::max<Index>(d, 2))) / static_cast<double>(n));
    const double lo = std::log(0.01 * unit);
    const double hi = std::log(2.0 * unit);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int t = 0; t < points; ++t) {
        grid[static_cast<std::size_t>(t)] = std::exp(lo + (hi - lo) * t / (points - 1));
    }
    return grid;
}

/// min over z in the grid of lambda_max(ST_z(Sigma_hat)) + k z, where ST_z
/// soft-thresholds every entry (diagonal included) at level z.
inline double mdp_statistic(const Matrix& sigma_hat, Index k, const std::vector<double>& z_grid) {
    detail::require(!z_grid.empty(), "mdp_statistic: empty z grid");
    detail::require(sigma_hat.rows() == sigma_hat.cols(), "mdp_statistic: matrix must be square");
    double best = std::numeric_limits<double>::infinity();
    Matrix thresholded(sigma_hat.rows(), sigma_hat.cols());
    for (double z : z_grid) {
        detail::require(z > 0.0, "mdp_statistic: grid values must be positive");
        thresholded = sigma_hat.unaryExpr([z](double v) { return soft_threshold(v, z); });
        best = std::min(best, largest_eigenvalue(thresholded) + z * static_cast<double>(k));
    }
    return best;
}

}  // namespace spca_slr

#endif
