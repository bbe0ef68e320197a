#pragma once

#include "fdslrm/estimators.hpp"
#include "fdslrm/model.hpp"
#include "fdslrm/variance.hpp"

namespace fdslrm {

struct EblupNeResult {
  EstimationResult initial;   // stage-1 estimate nu~
  VarianceComponents final;   // (NE nu_0, (Y*_1)^2, ..., (Y*_l)^2) at nu~
  VectorXd rho;               // rho_j(nu~) = nu_j ||v_j||^2 / (nu_0 + nu_j ||v_j||^2)
  bool zero_noise_limit = false;  // nu~_0 = 0, rho taken as its limit (1 or 0)
};

/// rho_j for an orthogonal design. At nu_0 = 0 the limit is used: 1 when
/// nu_j > 0, 0 when nu_j = 0.
VectorXd shrinkage_factors(const DesignSet& design, const VarianceComponents& nu);

/// Two-stage EBLUP-NE: estimate nu~ with `initial`, then put the BLUP at nu~
/// into the natural estimator. nu_0 is kept at its NE value.
/// Orthogonal designs only. A projection method is accepted only when its
/// estimate lies in the parameter space.
EblupNeResult eblup_ne(const DesignSet& design, const VectorXd& series, Method initial);

enum class MomentEstimator { ne, blup_ne };

/// Moments of the natural estimator or of BLUP-NE. These are evaluated at a
/// known nu, not at an estimate, so they are not the moments of EBLUP-NE.
/// Dispersion, covariance and MSE assume Gaussian data.
struct MomentSummary {
  MomentEstimator estimator = MomentEstimator::ne;
  VectorXd expectation;
  VectorXd bias;
  VectorXd dispersion;
  VectorXd mse;
  MatrixXd covariance;  // diagonal equals dispersion
};

/// General form through W^{-1} (NE) and W*^{-1} = D U*^{-1} (BLUP-NE). Any
/// design; nu_0 > 0 required.
MomentSummary blup_ne_moments(const DesignSet& design, const VarianceComponents& nu,
                              MomentEstimator estimator);

/// Orthogonal closed form in terms of rho_j. Throws Error(not_orthogonal).
MomentSummary blup_ne_moments_orthogonal(const DesignSet& design, const VarianceComponents& nu,
                                         MomentEstimator estimator);

}  // namespace fdslrm
