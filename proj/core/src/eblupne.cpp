#include "fdslrm/eblupne.hpp"

#include "fdslrm/error.hpp"
#include "fdslrm/mme.hpp"
#include "fdslrm/projection.hpp"

namespace fdslrm {

namespace {

void require_orthogonal(const DesignSet& design, const char* what) {
  if (!design.is_orthogonal())
    throw Error(ErrorCode::not_orthogonal, std::string(what) + " needs an orthogonal design");
}

MomentSummary finish(MomentEstimator estimator, const VarianceComponents& nu, VectorXd expectation,
                     MatrixXd covariance) {
  MomentSummary m;
  m.estimator = estimator;
  const VectorXd truth = nu.random();
  m.bias = expectation - truth;
  m.expectation = std::move(expectation);
  m.dispersion = covariance.diagonal();
  m.mse = m.dispersion + m.bias.cwiseAbs2();
  m.covariance = std::move(covariance);
  return m;
}

}  // namespace

VectorXd shrinkage_factors(const DesignSet& design, const VarianceComponents& nu) {
  require_orthogonal(design, "shrinkage_factors");
  nu.require_size(design.l(), "shrinkage_factors");
  const long l = design.l();
  VectorXd rho(l);
  for (long j = 0; j < l; ++j) {
    const double signal = nu[j + 1] * design.column_norms_sq()(j);
    if (!nu.positive_noise())
      rho(j) = signal > 0.0 ? 1.0 : 0.0;
    else
      rho(j) = signal / (nu.noise() + signal);
  }
  return rho;
}

EblupNeResult eblup_ne(const DesignSet& design, const VectorXd& series, Method initial) {
  require_orthogonal(design, "EBLUP-NE");
  const ProjectionCache cache = build_projection(design, series);
  EblupNeResult r{estimate(initial, cache, design), VarianceComponents::white_noise(0.0, 0),
                  VectorXd(), false};
  const VarianceComponents tilde = r.initial.components();
  const VarianceComponents ne = estimate_ne(cache, design);
  const long l = design.l();

  r.rho = shrinkage_factors(design, tilde);
  VectorXd out(l + 1);
  out(0) = ne.noise();
  if (tilde.positive_noise()) {
    const VectorXd y_star = blup_from_residuals(cache, design, tilde);
    out.tail(l) = y_star.cwiseAbs2();
  } else {
    r.zero_noise_limit = true;
    for (long j = 0; j < l; ++j) out(j + 1) = r.rho(j) * r.rho(j) * ne[j + 1];
  }
  r.final = VarianceComponents(std::move(out));
  return r;
}

MomentSummary blup_ne_moments(const DesignSet& design, const VarianceComponents& nu,
                              MomentEstimator estimator) {
  nu.require_size(design.l(), "blup_ne_moments");
  nu.require_positive_noise("blup_ne_moments");
  const double nu0 = nu.noise();
  const VectorXd truth = nu.random();

  // Y~ = W^{-1} V'M_F x has Cov = D + nu_0 W^{-1}; Y* = T* x has
  // Cov = D - nu_0 W*^{-1}. For a zero-mean Gaussian pair, Cov(a^2, b^2) = 2 Cov(a, b)^2.
  MatrixXd cov_y;
  if (estimator == MomentEstimator::ne) {
    const MatrixXd w_inv = design.w().llt().solve(MatrixXd::Identity(design.l(), design.l()));
    cov_y = nu0 * w_inv;
    cov_y.diagonal() += truth;
  } else {
    const SchurMatrices s = schur_matrices(design, nu, false);
    // Symmetrize: D U*^{-1} is symmetric in exact arithmetic.
    const MatrixXd w_star_inv = 0.5 * (s.w_star_inv + s.w_star_inv.transpose());
    cov_y = -nu0 * w_star_inv;
    cov_y.diagonal() += truth;
  }
  VectorXd expectation = cov_y.diagonal();
  MatrixXd covariance = 2.0 * cov_y.cwiseAbs2();
  return finish(estimator, nu, std::move(expectation), std::move(covariance));
}

MomentSummary blup_ne_moments_orthogonal(const DesignSet& design, const VarianceComponents& nu,
                                         MomentEstimator estimator) {
  require_orthogonal(design, "blup_ne_moments_orthogonal");
  nu.require_size(design.l(), "blup_ne_moments_orthogonal");
  nu.require_positive_noise("blup_ne_moments_orthogonal");
  const long l = design.l();
  const VectorXd truth = nu.random();
  VectorXd expectation(l);
  MatrixXd covariance = MatrixXd::Zero(l, l);
  if (estimator == MomentEstimator::ne) {
    for (long j = 0; j < l; ++j) {
      expectation(j) = truth(j) + nu.noise() / design.column_norms_sq()(j);
      covariance(j, j) = 2.0 * expectation(j) * expectation(j);
    }
  } else {
    const VectorXd rho = shrinkage_factors(design, nu);
    for (long j = 0; j < l; ++j) {
      expectation(j) = rho(j) * truth(j);
      covariance(j, j) = 2.0 * rho(j) * rho(j) * truth(j) * truth(j);
    }
  }
  return finish(estimator, nu, std::move(expectation), std::move(covariance));
}

}  // namespace fdslrm
