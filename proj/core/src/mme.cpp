#include "fdslrm/mme.hpp"

#include "fdslrm/error.hpp"

#include <algorithm>
#include <sstream>

namespace fdslrm {

namespace {

void check_series(const DesignSet& design, const VectorXd& series) {
  if (series.size() != design.n()) {
    std::ostringstream msg;
    msg << "series has " << series.size() << " observations, model expects n = " << design.n();
    throw Error(ErrorCode::length_mismatch, msg.str());
  }
}

VectorXd snapped_d(const VarianceComponents& nu) {
  VectorXd d = nu.random();
  const double cutoff = kEffectiveZero * nu.values().maxCoeff();
  for (long j = 0; j < d.size(); ++j)
    if (d(j) < cutoff) d(j) = 0.0;
  return d;
}

double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

BlupResult solve_mme(const DesignSet& design, const VectorXd& series, const VarianceComponents& nu) {
  check_series(design, series);
  nu.require_size(design.l(), "solve_mme");
  nu.require_positive_noise("solve_mme");
  const long k = design.k();
  const long l = design.l();
  const double nu0 = nu.noise();
  const VectorXd d = snapped_d(nu);

  const VectorXd ftx = design.F().transpose() * series;
  const VectorXd vtx = design.V().transpose() * series;

  BlupResult r;
  if (design.is_orthogonal()) {
    // Block-diagonal system; H* = diag(||v_j||^2 nu_j + nu_0).
    r.beta_hat = k > 0 ? VectorXd(design.ftf_inv() * ftx) : VectorXd(0);
    const VectorXd h = (design.column_norms_sq().array() * d.array() + nu0).matrix();
    const VectorXd z = vtx.cwiseQuotient(h);
    r.y_hat = d.cwiseProduct(z);
  } else {
    MatrixXd a(k + l, k + l);
    a.topLeftCorner(k, k) = design.ftf();
    a.topRightCorner(k, l) = design.ftv() * d.asDiagonal();
    a.bottomLeftCorner(l, k) = design.ftv().transpose();
    a.bottomRightCorner(l, l) = design.vtv() * d.asDiagonal();
    a.bottomRightCorner(l, l).diagonal().array() += nu0;
    VectorXd rhs(k + l);
    rhs << ftx, vtx;
    const VectorXd sol = a.partialPivLu().solve(rhs);
    r.beta_hat = sol.head(k);
    r.y_hat = d.cwiseProduct(sol.tail(l));
  }

  r.marginal_residuals = series;
  if (k > 0) r.marginal_residuals.noalias() -= design.F() * r.beta_hat;
  r.conditional_residuals = r.marginal_residuals;
  if (l > 0) r.conditional_residuals.noalias() -= design.V() * r.y_hat;
  return r;
}

VectorXd blup_from_residuals(const ProjectionCache& cache, const DesignSet& design,
                             const VarianceComponents& nu) {
  nu.require_size(design.l(), "blup_from_residuals");
  nu.require_positive_noise("blup_from_residuals");
  if (design.is_orthogonal()) {
    const VectorXd d = snapped_d(nu);
    const VectorXd u = (design.column_norms_sq().array() * d.array() + nu.noise()).matrix();
    return d.cwiseProduct(cache.vt_eps.cwiseQuotient(u));
  }
  const SchurMatrices s = schur_matrices(design, nu, false);
  // V'M_F x = V'eps because M_F is symmetric idempotent.
  return s.w_star_inv * cache.vt_eps;
}

double TStarResiduals::max() const { return std::max({product, design, dispersion}); }

TStarResiduals t_star_identities(const DesignSet& design, const VarianceComponents& nu) {
  const SchurMatrices s = schur_matrices(design, nu, true);
  const long l = design.l();
  const double nu0 = nu.noise();
  const MatrixXd& t = s.t_star;
  const MatrixXd id = MatrixXd::Identity(l, l);
  const MatrixXd shrink = id - nu0 * s.u_star_inv;  // I - nu_0 U*^{-1}

  TStarResiduals r;
  const MatrixXd ttt = t * t.transpose();
  r.product = max_abs(ttt - s.w_star_inv * shrink);

  // T*V = W*^{-1} W = I - nu_0 W*^{-1} D^{-1} = I - nu_0 U*^{-T}; the transpose
  // only matters when W is not diagonal.
  const MatrixXd tv = t * design.V();
  const MatrixXd shrink_t = id - nu0 * s.u_star_inv.transpose();
  r.design = std::max(max_abs(t * design.F()), max_abs(tv - shrink_t));

  // T* Sigma T*' with Sigma = nu_0 I + V D V', without forming Sigma.
  const MatrixXd tsigmat = nu0 * ttt + tv * s.d.asDiagonal() * tv.transpose();
  r.dispersion = max_abs(tsigmat - s.d.asDiagonal() * shrink);
  return r;
}

}  // namespace fdslrm
