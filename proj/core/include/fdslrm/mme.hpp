#pragma once

#include "fdslrm/model.hpp"
#include "fdslrm/projection.hpp"
#include "fdslrm/variance.hpp"

namespace fdslrm {

struct BlupResult {
  VectorXd beta_hat;               // BLUE of beta
  VectorXd y_hat;                  // BLUP of Y
  VectorXd conditional_residuals;  // x - F beta - V Y
  VectorXd marginal_residuals;     // x - F beta
};

/// Henderson's equations in the D-multiplied form
///   [F'F   F'V D] [beta]   [F'x]
///   [V'F   H*   ] [Z   ] = [V'x],   H* = V'V D + nu_0 I,  Y = D Z,
/// which stays well posed for singular or ill-conditioned D.
BlupResult solve_mme(const DesignSet& design, const VectorXd& series, const VarianceComponents& nu);

/// Y* = D U*^{-1} V' eps computed from the OLS residual alone.
VectorXd blup_from_residuals(const ProjectionCache& cache, const DesignSet& design,
                             const VarianceComponents& nu);

/// Max-abs residuals of the three T* identities:
///   product:    T*T*' = D U*^{-1} (I - nu_0 U*^{-1})
///   design:     T*F = 0 and T*V = I - nu_0 U*^{-T}
///   dispersion: T* Sigma T*' = D (I - nu_0 U*^{-1})
struct TStarResiduals {
  double product = 0;
  double design = 0;
  double dispersion = 0;

  double max() const;
};

TStarResiduals t_star_identities(const DesignSet& design, const VarianceComponents& nu);

}  // namespace fdslrm
