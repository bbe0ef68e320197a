#pragma once

#include "fdslrm/model.hpp"
#include "fdslrm/projection.hpp"
#include "fdslrm/variance.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdslrm {

// ---------------------------------------------------------------------------
// Natural estimators and the projection (unconstrained) double least squares.

/// Closed-form natural estimators for an orthogonal design:
///   nu_0 = (eps'eps - sum_j (eps'v_j)^2 / ||v_j||^2) / (n - k - l)
///   nu_j = (eps'v_j)^2 / ||v_j||^4
/// A negative nu_0 produced by rounding is clamped to 0.
VarianceComponents estimate_ne(const ProjectionCache& cache, const DesignSet& design);

/// eps'eps - sum_j (eps'v_j)^2/||v_j||^2, non-negative by Bessel's inequality.
double bessel_defect(const GramSystem& gram);

/// True when the OLS residual lies in the column span of V to within
/// 1e-12 * eps'eps, in which case nu_0 is estimated as exactly zero.
bool residual_in_random_span(const GramSystem& gram);

struct UnconstrainedEstimate {
  VectorXd values;
  bool has_negative = false;
};

/// G^{-1} q; may leave the parameter space.
UnconstrainedEstimate estimate_projection_doolse(const GramSystem& gram);

// ---------------------------------------------------------------------------
// Non-negative double least squares via enumeration of KKT systems.

/// b_j = 1 means nu_j is free (lambda_j = 0), b_j = 0 means nu_j = 0.
using ActivePattern = std::vector<bool>;

struct KktSolution {
  VarianceComponents nu_hat = VarianceComponents::white_noise(1.0, 0);
  ActivePattern active_pattern;
  int systems_tried = 0;
  VectorXd lagrange;                // lambda_1..lambda_l
  bool degenerate_residual = false; // eps in span(V): nu_0 = 0, nu_j = alpha_j^2
  bool boundary_tie = false;        // an accepted g_j sat inside the zero band
  bool fallback = false;            // no system passed the test; closest one returned
};

struct KktOptions {
  double acceptance = 1e-12;  // g >= -acceptance * max(1, ||q||_inf)
};

/// K(b) as in the KKT scheme: G with K_0j = 0 and K_jj = -1 wherever b_j = 0.
MatrixXd kkt_matrix(const GramSystem& gram, const ActivePattern& b);

/// Closed-form K(b)^{-1} from the Banachiewicz block inverse with
/// phi = n* - b' G_V D_b^{-1} G_V 1.
MatrixXd kkt_matrix_inverse(const GramSystem& gram, const ActivePattern& b);

/// g(b) = K(b)^{-1} q in O(l) operations.
VectorXd kkt_solve(const GramSystem& gram, const ActivePattern& b);

/// Order in which patterns are tried: descending popcount starting from
/// all-ones, lexicographic (b_1 most significant, 0 < 1) within a popcount.
std::vector<ActivePattern> kkt_scan_order(long l);

/// Every pattern whose g(b) passes the non-negativity test.
std::vector<ActivePattern> kkt_feasible_patterns(const GramSystem& gram,
                                                 const KktOptions& options = {});

/// Unique minimizer of nu'G nu - 2 q'nu over nu >= 0.
KktSolution estimate_nn_doolse(const GramSystem& gram, const KktOptions& options = {});

struct KktCertificate {
  bool primal_feasible = false;        // nu >= 0
  bool dual_feasible = false;          // lambda >= 0
  bool slackness_exact = false;        // nu_j * lambda_j == 0 exactly
  double stationarity_residual = 0.0;  // ||G nu - lambda - q||_inf / ||q||_inf
};

KktCertificate verify_kkt(const GramSystem& gram, const KktSolution& solution);

// ---------------------------------------------------------------------------
// Gaussian likelihoods.

enum class Likelihood { ml, reml };

/// l_M = (ln det Sigma^{-1} - ||x - F beta*||^2_{Sigma^{-1}}) / 2 and
/// l_R = l_M - ln det(F' Sigma^{-1} F) / 2, without the 2*pi constant.
/// Orthogonal designs use the closed-form determinant; others go dense.
double loglik(const ProjectionCache& cache, const DesignSet& design, const VarianceComponents& nu,
              Likelihood variant);

/// Orthogonal closed form. Throws Error(not_orthogonal) otherwise.
double loglik_orthogonal(const ProjectionCache& cache, const DesignSet& design,
                         const VarianceComponents& nu, Likelihood variant);

/// Dense evaluation through a Cholesky factor of Sigma; any design.
double loglik_dense(const DesignSet& design, const VectorXd& series, const VarianceComponents& nu,
                    Likelihood variant);

struct RemleResult {
  KktSolution solution;
  std::optional<double> loglik;  // empty when the maximum likelihood estimate does not exist
  bool exists = true;            // false when eps lies in span(V)
};

/// In an orthogonal design the ML (REML) estimate coincides with the
/// non-negative DOOLSE (MDOOLSE) solution; this evaluates it and its likelihood.
RemleResult estimate_remle(const ProjectionCache& cache, const DesignSet& design,
                           Likelihood variant, const KktOptions& options = {});

/// d_0 = 1/nu_0, d_j = nu_j / (nu_0 (nu_0 + ||v_j||^2 nu_j)).
struct DualVariables {
  VectorXd d;
};

DualVariables nu_to_d(const VarianceComponents& nu, const DesignSet& design);
VarianceComponents d_to_nu(const DualVariables& d, const DesignSet& design);

// ---------------------------------------------------------------------------
// Uniform front door used by eblupne and the CLI.

enum class Method {
  ne,
  projection_doolse,   // G^{-1} q, n* = n
  projection_mdoolse,  // G^{-1} q, n* = n - k
  nn_doolse,
  nn_mdoolse,
  mle,
  remle,
};

std::string_view method_name(Method m);
/// Accepts method_name() spellings plus "doolse"/"mdoolse" for the
/// non-negative variants; throws Error(parse_error).
Method parse_method(std::string_view name);

struct EstimationResult {
  Method method = Method::ne;
  VectorXd estimate;
  bool has_negative = false;
  bool degenerate_residual = false;
  std::optional<KktSolution> kkt;
  std::optional<double> loglik;

  std::string_view label() const { return method_name(method); }
  /// Throws Error(domain_error) for projection estimates with negative entries.
  VarianceComponents components() const;
};

EstimationResult estimate(Method method, const ProjectionCache& cache, const DesignSet& design);

}  // namespace fdslrm
