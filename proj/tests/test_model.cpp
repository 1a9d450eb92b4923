#include "spca_slr/model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spca_slr;

namespace {

SpikedModel uniform_model(Index d, Index k, double theta) {
    return make_model(d, k, theta, SpikeMode::uniform);
}

}  // namespace

TEST(MakeSpike, UniformIsInverseSqrtKOnLeadingCoordinates) {
    const Spike spike = make_spike(4, 4, SpikeMode::uniform);
    for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(spike.u[i], 0.5);
    EXPECT_EQ(spike.support, (IndexSet{0, 1, 2, 3}));
}

TEST(MakeSpike, RandomSignsHaveFixedMagnitude) {
    const Spike spike = make_spike(6, 3, SpikeMode::random_signs, 7);
    ASSERT_EQ(spike.support.size(), 3u);
    EXPECT_EQ((spike.u.array() != 0.0).count(), 3);
    for (Index i : spike.support) EXPECT_NEAR(std::abs(spike.u[i]), 1.0 / std::sqrt(3.0), 1e-15);
    spike.validate();
}

TEST(MakeSpike, RandomSphereIsUnitNormAndKSparse) {
    const Spike spike = make_spike(100, 10, SpikeMode::random_sphere, 1);
    EXPECT_NEAR(spike.u.norm(), 1.0, 1e-12);
    EXPECT_EQ((spike.u.array() != 0.0).count(), 10);
    spike.validate();
}

TEST(MakeSpike, SeedDeterminesSpike) {
    EXPECT_EQ(make_spike(50, 5, SpikeMode::random_sphere, 3).u, make_spike(50, 5, SpikeMode::random_sphere, 3).u);
    EXPECT_NE(make_spike(50, 5, SpikeMode::random_sphere, 3).u, make_spike(50, 5, SpikeMode::random_sphere, 4).u);
}

TEST(MakeSpike, RejectsBadSparsity) {
    EXPECT_THROW(make_spike(5, 0, SpikeMode::uniform), ParameterError);
    EXPECT_THROW(make_spike(5, 6, SpikeMode::random_signs, 1), ParameterError);
}

TEST(Spike, ValidateCatchesBrokenInvariants) {
    Spike bad;
    bad.u = Vector::Zero(3);
    bad.u[0] = 1.0;
    bad.support = {1};
    EXPECT_THROW(bad.validate(), ParameterError);
    bad.support = {0};
    EXPECT_NO_THROW(bad.validate());
    bad.u[0] = 0.9;
    EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(CheckCondition, Examples) {
    EXPECT_TRUE(check_condition(make_spike(8, 4, SpikeMode::uniform), 0.5, Condition::C2));
    Vector e1 = Vector::Zero(5);
    e1[0] = 1.0;
    const Spike corner = spike_from_vector(e1);
    for (double c : {0.1, 0.5, 0.9}) EXPECT_FALSE(check_condition(corner, c, Condition::C1));
    // |u_i| = 1/sqrt(k) is the equality case of C2 with c_min = 1.
    EXPECT_TRUE(check_condition(make_spike(20, 5, SpikeMode::random_signs, 2), 1.0, Condition::C2));
    EXPECT_TRUE(check_condition(make_spike(20, 5, SpikeMode::uniform), 0.5, Condition::C1));
}

TEST(PopulationCovariance, Examples) {
    SpikedModel null_model = uniform_model(5, 2, 0.0);
    EXPECT_TRUE(population_covariance(null_model).isApprox(Matrix::Identity(5, 5)));

    const Matrix sigma = population_covariance(uniform_model(4, 4, 1.0));
    for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(sigma(r, c), r == c ? 1.25 : 0.25);
    }
}

TEST(PopulationCovariance, SpectrumIsOneAndOnePlusTheta) {
    const SpikedModel model = make_model(30, 6, 2.5, SpikeMode::random_sphere, 11);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(population_covariance(model));
    EXPECT_NEAR(eig.eigenvalues().maxCoeff(), 3.5, 1e-10);
    EXPECT_NEAR(eig.eigenvalues().minCoeff(), 1.0, 1e-10);
}

TEST(LmmseOracle, UniformOnSupportClosedForms) {
    const LinearModelOracle oracle = lmmse_oracle(uniform_model(10, 4, 1.0), 0);
    EXPECT_TRUE(oracle.verified);
    ASSERT_EQ(oracle.beta_star.size(), 9);
    // coefficient 0.5 / 1.75 applied to the three other support entries (0.5 each)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(oracle.beta_star[j], 0.5 / 1.75 * 0.5, 1e-15);
    for (Index j = 3; j < 9; ++j) EXPECT_EQ(oracle.beta_star[j], 0.0);
    EXPECT_NEAR(oracle.beta_star[0], 0.142857142857, 1e-12);
    EXPECT_NEAR(oracle.sigma_sq, 1.142857142857, 1e-12);
    EXPECT_NEAR(oracle.signal, 0.107142857143, 1e-12);
}

TEST(LmmseOracle, OffSupportIsPureNoise) {
    const LinearModelOracle oracle = lmmse_oracle(uniform_model(10, 4, 1.0), 7);
    EXPECT_TRUE(oracle.beta_star.isZero(0.0));
    EXPECT_EQ(oracle.sigma_sq, 1.0);
    EXPECT_EQ(oracle.signal, 0.0);
}

TEST(LmmseOracle, LargeThetaLimitIsAveraging) {
    const Index k = 5;
    const LinearModelOracle oracle = lmmse_oracle(uniform_model(12, k, 1e6), 2, OracleCheck::none);
    // design order: coordinates 0, 1, 3, 4 of the support sit at positions 0, 1, 2, 3
    for (Index j = 0; j < k - 1; ++j) EXPECT_NEAR(oracle.beta_star[j], 1.0 / (k - 1), 1e-5);
}

TEST(LmmseOracle, RejectsOutOfRangeCoordinate) {
    EXPECT_THROW(lmmse_oracle(uniform_model(5, 2, 1.0), 5), ParameterError);
    EXPECT_THROW(lmmse_oracle(uniform_model(5, 2, 1.0), -1), ParameterError);
}

// Closed forms against dense linear algebra on the explicit covariance, for
// random models and every coordinate.
TEST(LmmseOracle, MatchesDenseLinearAlgebraOnRandomModels) {
    Rng rng(2024);
    for (int rep = 0; rep < 25; ++rep) {
        const Index d = 2 + static_cast<Index>(rng.uniform_index(30));
        const Index k = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(std::min<Index>(d, 10))));
        const double theta = 0.05 + 0.95 * rng.uniform();
        const SpikedModel model = make_model(d, k, theta, SpikeMode::random_sphere, rng.next_u64());
        const Matrix sigma = population_covariance(model);
        for (Index i = 0; i < d; ++i) {
            const LinearModelOracle oracle = lmmse_oracle(model, i, OracleCheck::none);
            const Vector dense = reference::dense_beta_star(sigma, i);
            EXPECT_LE((dense - oracle.beta_star).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_NEAR(oracle.sigma_sq, reference::dense_sigma_sq(sigma, i), 1e-10);
            EXPECT_NEAR(oracle.signal, reference::dense_signal(sigma, i), 1e-10);
            // theta <= 1 keeps the noise level in [1, 2]
            EXPECT_GE(oracle.sigma_sq, 1.0 - 1e-15);
            EXPECT_LE(oracle.sigma_sq, 2.0);
        }
    }
}

TEST(LmmseOracle, SignalLowerBoundUnderC1) {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        const Index d = 20;
        const Index k = 2 + static_cast<Index>(rng.uniform_index(8));
        const double theta = 0.1 + 0.9 * rng.uniform();
        const double c_min = 0.5;
        const SpikedModel model = make_model(d, k, theta, SpikeMode::random_sphere, rng.next_u64());
        for (Index i = 0; i < d; ++i) {
            const double sq = model.spike.u[i] * model.spike.u[i];
            const double lo = c_min * c_min / static_cast<double>(k);
            if (sq < lo || sq > 1.0 - lo) continue;
            const double signal = lmmse_oracle(model, i, OracleCheck::none).signal;
            EXPECT_GE(signal, c_min * c_min / 4.0 * theta * theta / static_cast<double>(k));
        }
    }
}

TEST(ShermanMorrison, ZeroVectorGivesIdentity) {
    EXPECT_TRUE(sherman_morrison_inverse(Vector::Zero(4), 3.0).isApprox(Matrix::Identity(4, 4)));
}

TEST(ShermanMorrison, IsAnInverse) {
    const Vector v = reference::gaussian_matrix(7, 1, 5).col(0);
    const Matrix inverse = sherman_morrison_inverse(v, 0.5);
    Matrix a = 0.5 * v * v.transpose();
    a.diagonal().array() += 1.0;
    EXPECT_LE(((a * inverse) - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ShermanMorrison, UniformDesignMatchesDenseInverse) {
    Vector v = Vector::Zero(9);
    v.head(3).setConstant(0.5);  // u_{-1} of a uniform k = 4 spike
    Matrix a = v * v.transpose();
    a.diagonal().array() += 1.0;
    EXPECT_LE((sherman_morrison_inverse(v, 1.0) - a.inverse()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ShermanMorrison, SingularThrows) {
    Vector v = Vector::Zero(3);
    v[0] = 1.0;
    EXPECT_THROW(sherman_morrison_inverse(v, -1.0), SingularityError);
}

TEST(DesignEigenvalues, UniformExample) {
    const auto [lo, hi] = design_eigenvalues(uniform_model(10, 4, 1.0), 0);
    EXPECT_DOUBLE_EQ(lo, 1.0);
    EXPECT_DOUBLE_EQ(hi, 1.75);
}

TEST(DesignEigenvalues, ZeroThetaAndOffSupport) {
    const auto [lo, hi] = design_eigenvalues(uniform_model(6, 3, 0.0), 1);
    EXPECT_EQ(lo, 1.0);
    EXPECT_EQ(hi, 1.0);
    const auto off = design_eigenvalues(uniform_model(6, 3, 2.0), 5);
    EXPECT_EQ(off.first, 1.0);
    EXPECT_DOUBLE_EQ(off.second, 3.0);
}

TEST(DesignEigenvalues, MatchesDenseEigensolver) {
    for (Seed seed : {1u, 2u, 3u, 4u}) {
        const SpikedModel model = make_model(25, 7, 0.8, SpikeMode::random_sphere, seed);
        const Matrix sigma = population_covariance(model);
        for (Index i : model.spike.support) {
            const Matrix design = drop_column(drop_column(sigma, i).transpose(), i);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(design, Eigen::EigenvaluesOnly);
            const auto [lo, hi] = design_eigenvalues(model, i);
            EXPECT_NEAR(lo, eig.eigenvalues().minCoeff(), 1e-10);
            EXPECT_NEAR(hi, eig.eigenvalues().maxCoeff(), 1e-10);
        }
    }
}

TEST(SpikedModel, ThetaDiagnostic) {
    EXPECT_TRUE(uniform_model(5, 2, 1.0).theta_in_theory_range());
    EXPECT_FALSE(uniform_model(5, 2, 4.0).theta_in_theory_range());
}
