#include "fdslrm/error.hpp"
#include "fdslrm/estimators.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace fdslrm;

namespace {

GramSystem small_gram(double q0, double q1) {
  return GramSystem::from_arrow(3.0, Eigen::VectorXd::Ones(1), Eigen::Vector2d(q0, q1));
}

// n = 3, k = 0, v = e_1.
DesignSet unit_design() {
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 1);
  V(0, 0) = 1;
  return DesignSet::from_matrices(Eigen::MatrixXd(3, 0), V);
}

}  // namespace

TEST(NaturalEstimator, DirectEvaluation) {
  const DesignSet d = unit_design();
  const auto nu = estimate_ne(build_projection(d, Eigen::Vector3d(2, 1, 1)), d);
  EXPECT_DOUBLE_EQ(nu[0], 1.0);
  EXPECT_DOUBLE_EQ(nu[1], 4.0);
}

TEST(NaturalEstimator, ResidualOrthogonalToRandomPart) {
  const DesignSet d = unit_design();
  const auto nu = estimate_ne(build_projection(d, Eigen::Vector3d(0, 1, 3)), d);
  EXPECT_EQ(nu[1], 0.0);
  EXPECT_DOUBLE_EQ(nu[0], 10.0 / 2.0);
}

TEST(NaturalEstimator, ResidualInRandomSpanGivesZeroNoise) {
  const DesignSet d = realize({8, {TermSpec::constant()},
                               {TermSpec::cosine_harmonic(1, 8), TermSpec::sine_harmonic(1, 8)}});
  const Eigen::VectorXd x = 2.0 + 1.5 * d.V().col(0).array() - 0.5 * d.V().col(1).array();
  const auto nu = estimate_ne(build_projection(d, x), d);
  EXPECT_EQ(nu[0], 0.0);
  EXPECT_NEAR(nu[1], 2.25, 1e-12);
  EXPECT_NEAR(nu[2], 0.25, 1e-12);
}

TEST(ProjectionDoolse, SmallSystems) {
  const auto a = estimate_projection_doolse(small_gram(6, 4));
  EXPECT_NEAR(a.values(0), 1.0, 1e-14);
  EXPECT_NEAR(a.values(1), 3.0, 1e-14);
  EXPECT_FALSE(a.has_negative);
  const auto b = estimate_projection_doolse(small_gram(6, 0));
  EXPECT_NEAR(b.values(0), 3.0, 1e-14);
  EXPECT_NEAR(b.values(1), -3.0, 1e-14);
  EXPECT_TRUE(b.has_negative);
  const auto g = GramSystem::from_arrow(10, Eigen::Vector2d(2, 3), Eigen::Vector3d::Zero());
  const Eigen::VectorXd q = g.G * Eigen::Vector3d(1.7, 0, 0);
  const auto c = estimate_projection_doolse(GramSystem::from_arrow(10, Eigen::Vector2d(2, 3), q));
  EXPECT_LT((c.values - Eigen::Vector3d(1.7, 0, 0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectionDoolse, MatchesMatrixLeastSquares) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const DesignSet d = realize(oracle::random_spec(rng, true, {10, 30, 3, 4, 0.3}));
    const Eigen::VectorXd x = oracle::gaussian_series(rng, d, Eigen::VectorXd::Ones(d.k()),
                                                      oracle::random_nu(rng, d.l()));
    const auto cache = build_projection(d, x);
    for (bool modified : {false, true}) {
      const auto est = estimate(modified ? Method::projection_mdoolse : Method::projection_doolse,
                                cache, d);
      const Eigen::VectorXd o = oracle::doolse_vec(d, x, modified);
      EXPECT_LT((est.estimate - o).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, o.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(ProjectionDoolse, NegativeEstimateIsNotAVarianceComponent) {
  const DesignSet d = unit_design();
  // eps'v = 0 pushes the unconstrained nu_1 below zero.
  const auto r = estimate(Method::projection_doolse, build_projection(d, Eigen::Vector3d(0, 1, 3)), d);
  EXPECT_TRUE(r.has_negative);
  EXPECT_LT(r.estimate(1), 0.0);
  EXPECT_THROW(r.components(), Error);
}

TEST(DualVariables, Substitutions) {
  const DesignSet d = unit_design();
  const auto a = nu_to_d(VarianceComponents(Eigen::Vector2d(1, 0)), d);
  EXPECT_EQ(a.d, Eigen::Vector2d(1, 0));
  const auto b = nu_to_d(VarianceComponents(Eigen::Vector2d(1, 1)), d);
  EXPECT_DOUBLE_EQ(b.d(0), 1.0);
  EXPECT_DOUBLE_EQ(b.d(1), 0.5);
}

TEST(DualVariables, RoundTrip) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const DesignSet d = realize(oracle::random_spec(rng, true, {10, 60, 3, 6, 0.3}));
    const auto nu = oracle::random_nu(rng, d.l());
    const auto back = d_to_nu(nu_to_d(nu, d), d);
    for (long j = 0; j <= d.l(); ++j)
      EXPECT_NEAR(back[j], nu[j], 1e-12 * std::max(nu[j], 1e-300));
    const auto dual = nu_to_d(nu, d);
    for (long j = 0; j < d.l(); ++j) EXPECT_GT(dual.d(0), dual.d(j + 1) * d.column_norms_sq()(j));
  }
}

TEST(DualVariables, DomainViolations) {
  const DesignSet d = unit_design();
  EXPECT_THROW(d_to_nu({Eigen::Vector2d(1, 1)}, d), Error);   // d_0 = d_1 ||v||^2
  EXPECT_THROW(d_to_nu({Eigen::Vector2d(0, 0)}, d), Error);
  EXPECT_THROW(d_to_nu({Eigen::Vector2d(1, -0.1)}, d), Error);
  EXPECT_THROW(nu_to_d(VarianceComponents(Eigen::Vector2d(0, 1)), d), Error);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::ne, Method::projection_doolse, Method::projection_mdoolse, Method::nn_doolse,
                   Method::nn_mdoolse, Method::mle, Method::remle})
    EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(parse_method("doolse"), Method::nn_doolse);
  EXPECT_EQ(parse_method("mdoolse"), Method::nn_mdoolse);
  EXPECT_THROW(parse_method("minque"), Error);
}

TEST(Methods, OrthogonalOnlyEstimatorsRejectGeneralDesigns) {
  const DesignSet d = realize({20, {TermSpec::constant()}, {TermSpec::cosine(0.7)}});
  const auto cache = build_projection(d, Eigen::VectorXd::LinSpaced(20, 0, 1));
  for (Method m : {Method::ne, Method::projection_doolse, Method::nn_mdoolse, Method::remle}) {
    try {
      estimate(m, cache, d);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::not_orthogonal);
    }
  }
}

TEST(VarianceComponentsType, Invariants) {
  EXPECT_THROW(VarianceComponents(Eigen::Vector2d(1, -1)), Error);
  EXPECT_THROW(VarianceComponents(Eigen::Vector2d(-1, 1)), Error);
  EXPECT_THROW(VarianceComponents(Eigen::Vector2d(1, std::nan(""))), Error);
  EXPECT_FALSE(VarianceComponents(Eigen::Vector2d(0, 1)).positive_noise());
}
