#include "fdslrm/projection.hpp"

#include "fdslrm/error.hpp"

#include <sstream>

namespace fdslrm {

ProjectionCache build_projection(const DesignSet& design, const VectorXd& series) {
  if (series.size() != design.n()) {
    std::ostringstream msg;
    msg << "series has " << series.size() << " observations, model expects n = " << design.n();
    throw Error(ErrorCode::length_mismatch, msg.str());
  }
  ProjectionCache cache;
  cache.eps = series;
  if (design.k() > 0) {
    cache.beta_ols = design.ftf_inv() * (design.F().transpose() * series);
    cache.eps.noalias() -= design.F() * cache.beta_ols;
  } else {
    cache.beta_ols.resize(0);
  }
  cache.vt_eps = design.V().transpose() * cache.eps;
  cache.eps_sq = cache.eps.squaredNorm();
  return cache;
}

GramSystem GramSystem::from_arrow(double n_star, VectorXd norms_sq, VectorXd q,
                                  DoolseVariant variant) {
  const long l = norms_sq.size();
  if (q.size() != l + 1)
    throw Error(ErrorCode::length_mismatch, "q must have l + 1 entries");
  if (!(n_star > static_cast<double>(l)))
    throw Error(ErrorCode::invalid_model, "n* must exceed l for G to be positive definite");
  GramSystem g;
  g.G = MatrixXd::Zero(l + 1, l + 1);
  g.G(0, 0) = n_star;
  for (long j = 0; j < l; ++j) {
    g.G(0, j + 1) = norms_sq(j);
    g.G(j + 1, 0) = norms_sq(j);
    g.G(j + 1, j + 1) = norms_sq(j) * norms_sq(j);
  }
  g.q = std::move(q);
  g.n_star = n_star;
  g.norms_sq = std::move(norms_sq);
  g.variant = variant;
  return g;
}

GramSystem gram_system(const ProjectionCache& cache, const DesignSet& design,
                       DoolseVariant variant) {
  if (!design.is_orthogonal())
    throw Error(ErrorCode::not_orthogonal,
                "the arrow-form Gram system requires F'V = 0 and diagonal V'V");
  const long l = design.l();
  VectorXd q(l + 1);
  q(0) = cache.eps_sq;
  q.tail(l) = cache.vt_eps.array().square();
  const double n = static_cast<double>(design.n());
  const double n_star = variant == DoolseVariant::doolse ? n : n - static_cast<double>(design.k());
  return GramSystem::from_arrow(n_star, design.column_norms_sq(), std::move(q), variant);
}

SchurMatrices schur_matrices(const DesignSet& design, const VarianceComponents& nu,
                             bool with_t_star) {
  const long l = design.l();
  nu.require_size(l, "schur_matrices");
  nu.require_positive_noise("schur_matrices");
  const double nu0 = nu.noise();

  SchurMatrices s;
  s.d = nu.random();
  const double cutoff = kEffectiveZero * nu.values().maxCoeff();
  for (long j = 0; j < l; ++j) {
    if (s.d(j) < cutoff) {
      s.d(j) = 0.0;
      s.singular_d = true;
    }
  }

  s.u_star = design.w() * s.d.asDiagonal();
  s.u_star.diagonal().array() += nu0;
  if (design.is_orthogonal()) {
    s.u_star_inv = s.u_star.diagonal().cwiseInverse().asDiagonal();
  } else {
    s.u_star_inv = s.u_star.partialPivLu().inverse();
  }
  s.w_star_inv = s.d.asDiagonal() * s.u_star_inv;
  if (!s.singular_d) {
    // W* = U* D^{-1}, avoiding nu_0 D^{-1} added to W directly.
    s.w_star = s.u_star * s.d.cwiseInverse().asDiagonal();
  }
  if (with_t_star) s.t_star = s.w_star_inv * design.mf_v().transpose();
  return s;
}

}  // namespace fdslrm
