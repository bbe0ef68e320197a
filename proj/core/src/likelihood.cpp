#include "fdslrm/error.hpp"
#include "fdslrm/estimators.hpp"

#include <cmath>

namespace fdslrm {

namespace {

double log_det_spd(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::non_positive_definite, "matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double loglik_orthogonal(const ProjectionCache& cache, const DesignSet& design,
                         const VarianceComponents& nu, Likelihood variant) {
  if (!design.is_orthogonal())
    throw Error(ErrorCode::not_orthogonal, "closed-form likelihood needs an orthogonal design");
  nu.require_size(design.l(), "loglik");
  if (!nu.positive_noise())
    throw Error(ErrorCode::non_positive_definite, "Sigma is singular for nu_0 = 0");

  const DualVariables dual = nu_to_d(nu, design);
  const VectorXd& d = dual.d;
  const VectorXd& norms = design.column_norms_sq();
  const long n = design.n();
  const long k = design.k();
  const long l = design.l();

  // ln det Sigma^{-1} = (n - l) ln d_0 + sum_j ln(d_0 - d_j ||v_j||^2), where
  // d_0 - d_j ||v_j||^2 = 1 / (nu_0 + nu_j ||v_j||^2) is evaluated directly.
  double log_det = static_cast<double>(n - l) * std::log(d(0));
  double quad = d(0) * cache.eps_sq;
  for (long j = 0; j < l; ++j) {
    log_det -= std::log(nu.noise() + nu[j + 1] * norms(j));
    quad -= d(j + 1) * cache.vt_eps(j) * cache.vt_eps(j);
  }
  double value = 0.5 * (log_det - quad);
  if (variant == Likelihood::reml)
    value -= 0.5 * (static_cast<double>(k) * std::log(d(0)) + log_det_spd(design.ftf()));
  return value;
}

double loglik_dense(const DesignSet& design, const VectorXd& series, const VarianceComponents& nu,
                    Likelihood variant) {
  nu.require_size(design.l(), "loglik");
  if (series.size() != design.n())
    throw Error(ErrorCode::length_mismatch, "series length does not match the design");
  if (!nu.positive_noise())
    throw Error(ErrorCode::non_positive_definite, "Sigma is singular for nu_0 = 0");
  const MatrixXd& F = design.F();
  const MatrixXd& V = design.V();

  MatrixXd sigma = V * nu.random().asDiagonal() * V.transpose();
  sigma.diagonal().array() += nu.noise();
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::non_positive_definite, "Sigma is not positive definite");
  const double log_det_inv = -2.0 * llt.matrixLLT().diagonal().array().log().sum();

  VectorXd resid = series;
  double log_det_fsf = 0.0;
  if (design.k() > 0) {
    const MatrixXd sinv_f = llt.solve(F);
    const MatrixXd fsf = F.transpose() * sinv_f;
    const VectorXd beta = fsf.llt().solve(sinv_f.transpose() * series);
    resid.noalias() -= F * beta;
    log_det_fsf = log_det_spd(fsf);
  }
  const double quad = resid.dot(llt.solve(resid));
  double value = 0.5 * (log_det_inv - quad);
  if (variant == Likelihood::reml) value -= 0.5 * log_det_fsf;
  return value;
}

double loglik(const ProjectionCache& cache, const DesignSet& design, const VarianceComponents& nu,
              Likelihood variant) {
  if (design.is_orthogonal()) return loglik_orthogonal(cache, design, nu, variant);
  VectorXd series = cache.eps;
  if (design.k() > 0) series.noalias() += design.F() * cache.beta_ols;
  return loglik_dense(design, series, nu, variant);
}

RemleResult estimate_remle(const ProjectionCache& cache, const DesignSet& design,
                           Likelihood variant, const KktOptions& options) {
  if (!design.is_orthogonal())
    throw Error(ErrorCode::not_orthogonal,
                "likelihood estimates via the KKT route need an orthogonal design");
  const auto gram = gram_system(cache, design,
                                variant == Likelihood::ml ? DoolseVariant::doolse
                                                          : DoolseVariant::mdoolse);
  RemleResult r;
  r.solution = estimate_nn_doolse(gram, options);
  r.exists = !r.solution.degenerate_residual;
  if (r.exists) r.loglik = loglik_orthogonal(cache, design, r.solution.nu_hat, variant);
  return r;
}

}  // namespace fdslrm
