#pragma once

#include "fdslrm/model.hpp"
#include "fdslrm/variance.hpp"

#include <optional>

namespace fdslrm {

/// Series-dependent OLS quantities. The trend projector M_F itself is never
/// stored; use DesignSet::apply_mf or DesignSet::projector.
struct ProjectionCache {
  VectorXd eps;       // M_F x
  VectorXd beta_ols;  // (F'F)^{-1} F'x
  VectorXd vt_eps;    // V' eps
  double eps_sq = 0;  // eps' eps
};

ProjectionCache build_projection(const DesignSet& design, const VectorXd& series);

enum class DoolseVariant { doolse, mdoolse };

/// Arrow-shaped Gram matrix G and right-hand side q of the orthogonal
/// double-least-squares problem min nu'G nu - 2 q'nu.
struct GramSystem {
  MatrixXd G;
  VectorXd q;
  double n_star = 0;
  VectorXd norms_sq;  // ||v_j||^2, the arrow of G
  DoolseVariant variant = DoolseVariant::doolse;

  long l() const noexcept { return norms_sq.size(); }

  /// Builds G from n* and ||v_j||^2; q = (eps'eps, (eps'v_1)^2, ...).
  static GramSystem from_arrow(double n_star, VectorXd norms_sq, VectorXd q,
                               DoolseVariant variant = DoolseVariant::doolse);
};

/// Throws Error(not_orthogonal) for non-orthogonal designs.
GramSystem gram_system(const ProjectionCache& cache, const DesignSet& design,
                       DoolseVariant variant);

struct SchurMatrices {
  VectorXd d;                      // diag(D) with effective zeros snapped to 0
  MatrixXd u_star;                 // W D + nu_0 I
  MatrixXd u_star_inv;
  MatrixXd w_star_inv;             // D U*^{-1}; equals (W + nu_0 D^{-1})^{-1} for nonsingular D
  std::optional<MatrixXd> w_star;  // W + nu_0 D^{-1}, only for nonsingular D
  MatrixXd t_star;                 // D U*^{-1} V' M_F (l x n), empty unless requested
  bool singular_d = false;
};

/// nu_j below this fraction of max(nu) is treated as exactly zero.
inline constexpr double kEffectiveZero = 1e-14;

SchurMatrices schur_matrices(const DesignSet& design, const VarianceComponents& nu,
                             bool with_t_star = true);

}  // namespace fdslrm
