#ifndef SPCA_SLR_MODEL_HPP
#define SPCA_SLR_MODEL_HPP

// Spiked covariance model N(0, I_d + theta * u u^T) and the closed-form
// quantities of the linear model obtained by regressing one coordinate on
// all the others.
//
// Coordinate convention: the regression for target coordinate i uses the
// remaining d-1 coordinates in their original order, so coordinate j > i
// appears at position j-1 of every vector indexed over the design.

#include "spca_slr/errors.hpp"
#include "spca_slr/rng.hpp"
#include "spca_slr/types.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace spca_slr {

/// Unit-norm planted direction with an explicit, strictly increasing support.
struct Spike {
    Vector u;
    IndexSet support;

    Index dimension() const { return u.size(); }
    bool on_support(Index i) const { return std::binary_search(support.begin(), support.end(), i); }

    /// Throws ParameterError unless the invariants hold.
    void validate() const {
        const Index d = u.size();
        detail::require(d >= 1, "spike: empty vector");
        detail::require(std::abs(u.norm() - 1.0) <= 1e-12, "spike: u must have unit norm");
        for (std::size_t s = 0; s < support.size(); ++s) {
            detail::require(support[s] >= 0 && support[s] < d, "spike: support index out of range");
            detail::require(s == 0 || support[s] > support[s - 1], "spike: support must be strictly increasing");
        }
        for (Index i = 0; i < d; ++i) {
            detail::require(on_support(i) || u[i] == 0.0, "spike: nonzero entry outside support");
        }
    }
};

enum class SpikeMode { uniform, random_signs, random_sphere };

inline SpikeMode parse_spike_mode(const std::string& name) {
    if (name == "uniform") return SpikeMode::uniform;
    if (name == "random_signs") return SpikeMode::random_signs;
    if (name == "random_sphere") return SpikeMode::random_sphere;
    throw ParameterError("unknown spike mode '" + name + "'");
}

/// k-sparse unit spike in dimension d.
///
/// uniform: 1/sqrt(k) on coordinates 0..k-1 (seed unused).
/// random_signs: +-1/sqrt(k) on a uniformly random size-k support.
/// random_sphere: uniform point of the (k-1)-sphere on a random size-k support.
inline Spike make_spike(Index d, Index k, SpikeMode mode, Seed seed = 0) {
    detail::require(k >= 1 && k <= d, "make_spike: need 1 <= k <= d");
    Spike spike;
    spike.u = Vector::Zero(d);
    const double magnitude = 1.0 / std::sqrt(static_cast<double>(k));
    if (mode == SpikeMode::uniform) {
        spike.support.resize(static_cast<std::size_t>(k));
        std::iota(spike.support.begin(), spike.support.end(), Index{0});
        spike.u.head(k).setConstant(magnitude);
        return spike;
    }

    Rng rng(seed);
    spike.support = rng.subset<Index>(d, k);
    if (mode == SpikeMode::random_signs) {
        for (Index s : spike.support) {
            spike.u[s] = (rng.next_u64() >> 63) ? magnitude : -magnitude;
        }
        return spike;
    }

    Vector direction(k);
    double norm = 0.0;
    while (norm == 0.0) {
        for (Index j = 0; j < k; ++j) {
            direction[j] = rng.normal();
        }
        norm = direction.norm();
    }
    direction /= norm;
    for (Index j = 0; j < k; ++j) {
        spike.u[spike.support[static_cast<std::size_t>(j)]] = direction[j];
    }
    return spike;
}

/// Builds a Spike from an arbitrary unit vector; support = nonzero entries.
inline Spike spike_from_vector(const Vector& u) {
    Spike spike;
    spike.u = u;
    for (Index i = 0; i < u.size(); ++i) {
        if (u[i] != 0.0) spike.support.push_back(i);
    }
    spike.validate();
    return spike;
}

enum class Condition { C1, C2 };

/// C1: some coordinate has c^2/k <= u_i^2 <= 1 - c^2/k.
/// C2: every support coordinate has |u_i| >= c/sqrt(k).
/// k is taken as |support|.
inline bool check_condition(const Spike& spike, double c_min, Condition which) {
    const auto k = static_cast<double>(spike.support.size());
    if (which == Condition::C1) {
        const double lo = c_min * c_min / k;
        for (Index i = 0; i < spike.u.size(); ++i) {
            const double sq = spike.u[i] * spike.u[i];
            if (sq >= lo && sq <= 1.0 - lo) return true;
        }
        return false;
    }
    const double floor = c_min / std::sqrt(k);
    return std::all_of(spike.support.begin(), spike.support.end(),
                       [&](Index i) { return std::abs(spike.u[i]) >= floor; });
}

struct SpikedModel {
    Index d = 0;
    Index k = 0;
    double theta = 0.0;
    Spike spike;

    /// Throws ParameterError unless 1 <= k <= d, theta >= 0 and the spike is valid for (d, k).
    void validate() const {
        detail::require(d >= 1, "model: d must be positive");
        detail::require(k >= 1 && k <= d, "model: need 1 <= k <= d");
        detail::require(std::isfinite(theta) && theta >= 0.0, "model: theta must be finite and nonnegative");
        detail::require(spike.dimension() == d, "model: spike dimension mismatch");
        detail::require(static_cast<Index>(spike.support.size()) <= k, "model: spike support exceeds k");
        spike.validate();
    }

    /// The analysis assumes theta <= 1; larger values are accepted.
    bool theta_in_theory_range() const { return theta <= 1.0; }
};

inline SpikedModel make_model(Index d, Index k, double theta, SpikeMode mode, Seed seed = 0) {
    SpikedModel model{d, k, theta, make_spike(d, k, mode, seed)};
    model.validate();
    return model;
}

inline Matrix population_covariance(const SpikedModel& model) {
    Matrix sigma = model.theta * model.spike.u * model.spike.u.transpose();
    sigma.diagonal().array() += 1.0;
    return sigma;
}

/// (I + c v v^T)^{-1} = I - c/(1 + c v^T v) v v^T.
inline Matrix sherman_morrison_inverse(const Vector& v, double c) {
    const double denominator = 1.0 + c * v.squaredNorm();
    if (denominator == 0.0 || !std::isfinite(denominator)) {
        throw SingularityError("sherman_morrison_inverse: 1 + c v^T v = 0");
    }
    Matrix inverse = -(c / denominator) * v * v.transpose();
    inverse.diagonal().array() += 1.0;
    return inverse;
}

/// Closed-form best linear predictor of coordinate i from the other d-1.
struct LinearModelOracle {
    Index target_index = 0;
    Vector beta_star;        ///< length d-1, design order
    double sigma_sq = 1.0;   ///< residual variance
    double signal = 0.0;     ///< beta*^T Sigma_{-i} beta*
    bool verified = false;   ///< closed form agreed with the dense solve to 1e-10
    double verification_error = 0.0;
};

enum class OracleCheck { numeric, none };

inline LinearModelOracle lmmse_oracle(const SpikedModel& model, Index i,
                                      OracleCheck check = OracleCheck::numeric) {
    detail::require(i >= 0 && i < model.d, "lmmse_oracle: coordinate out of range");
    detail::require(model.d >= 2, "lmmse_oracle: need d >= 2");
    const double theta = model.theta;
    const double ui = model.spike.u[i];
    const double rest = 1.0 - ui * ui;  // ||u_{-i}||^2
    const double shrink = 1.0 + rest * theta;

    LinearModelOracle oracle;
    oracle.target_index = i;
    oracle.beta_star = (theta * ui / shrink) * drop_entry(model.spike.u, i);
    oracle.sigma_sq = 1.0 + theta * ui * ui / shrink;
    oracle.signal = theta * theta * ui * ui * rest / shrink;

    if (check == OracleCheck::numeric) {
        const Matrix sigma = population_covariance(model);
        const Matrix design_cov = drop_column(drop_column(sigma, i).transpose(), i);
        const Vector cross = drop_entry(sigma.col(i), i);
        const Vector numeric = design_cov.ldlt().solve(cross);
        oracle.verification_error = (numeric - oracle.beta_star).cwiseAbs().maxCoeff();
        oracle.verified = oracle.verification_error <= 1e-10;
    } else {
        oracle.verified = false;
    }
    return oracle;
}

/// Extreme eigenvalues of the design covariance I_{d-1} + theta u_{-i} u_{-i}^T,
/// namely 1 and 1 + theta (1 - u_i^2). With d = 2 both equal the single eigenvalue.
inline std::pair<double, double> design_eigenvalues(const SpikedModel& model, Index i) {
    detail::require(i >= 0 && i < model.d, "design_eigenvalues: coordinate out of range");
    const double ui = model.spike.u[i];
    const double top = 1.0 + model.theta * (1.0 - ui * ui);
    if (model.d == 2) return {top, top};
    return {1.0, top};
}

}  // namespace spca_slr

#endif
