#include "fdslrm/estimators.hpp"

#include "fdslrm/error.hpp"

#include <sstream>

namespace fdslrm {

namespace {

void require_orthogonal(const DesignSet& design, const char* what) {
  if (!design.is_orthogonal())
    throw Error(ErrorCode::not_orthogonal,
                std::string(what) + " is defined for orthogonal designs (F'V = 0, V'V diagonal)");
}

}  // namespace

double bessel_defect(const GramSystem& gram) {
  double defect = gram.q(0);
  for (long j = 0; j < gram.l(); ++j) defect -= gram.q(j + 1) / gram.norms_sq(j);
  return defect;
}

bool residual_in_random_span(const GramSystem& gram) {
  return bessel_defect(gram) <= 1e-12 * gram.q(0);
}

VarianceComponents estimate_ne(const ProjectionCache& cache, const DesignSet& design) {
  require_orthogonal(design, "the natural estimator");
  const long l = design.l();
  const VectorXd& norms = design.column_norms_sq();
  VectorXd nu(l + 1);
  double explained = 0.0;
  for (long j = 0; j < l; ++j) {
    const double c2 = cache.vt_eps(j) * cache.vt_eps(j);
    explained += c2 / norms(j);
    nu(j + 1) = c2 / (norms(j) * norms(j));
  }
  const double defect = cache.eps_sq - explained;
  const double dof = static_cast<double>(design.n() - design.k() - l);
  nu(0) = defect <= 1e-12 * cache.eps_sq ? 0.0 : defect / dof;
  return VarianceComponents(std::move(nu));
}

UnconstrainedEstimate estimate_projection_doolse(const GramSystem& gram) {
  UnconstrainedEstimate out;
  out.values = gram.G.llt().solve(gram.q);
  out.has_negative = (out.values.array() < 0.0).any();
  return out;
}

DualVariables nu_to_d(const VarianceComponents& nu, const DesignSet& design) {
  nu.require_size(design.l(), "nu_to_d");
  nu.require_positive_noise("nu_to_d");
  const double nu0 = nu.noise();
  DualVariables out;
  out.d.resize(nu.values().size());
  out.d(0) = 1.0 / nu0;
  for (long j = 0; j < design.l(); ++j) {
    const double nuj = nu[j + 1];
    out.d(j + 1) = nuj / (nu0 * (nu0 + design.column_norms_sq()(j) * nuj));
  }
  return out;
}

VarianceComponents d_to_nu(const DualVariables& d, const DesignSet& design) {
  const long l = design.l();
  if (d.d.size() != l + 1) throw Error(ErrorCode::length_mismatch, "d must have l + 1 entries");
  const double d0 = d.d(0);
  if (!(d0 > 0.0)) throw Error(ErrorCode::domain_error, "d_0 must be positive");
  VectorXd nu(l + 1);
  nu(0) = 1.0 / d0;
  for (long j = 0; j < l; ++j) {
    const double dj = d.d(j + 1);
    const double gap = d0 - dj * design.column_norms_sq()(j);
    if (!(dj >= 0.0) || !(gap > 0.0)) {
      std::ostringstream msg;
      msg << "d_" << j + 1 << " violates 0 <= d_j < d_0/||v_j||^2";
      throw Error(ErrorCode::domain_error, msg.str());
    }
    nu(j + 1) = dj / (d0 * gap);
  }
  return VarianceComponents(std::move(nu));
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ne: return "ne";
    case Method::projection_doolse: return "proj-doolse";
    case Method::projection_mdoolse: return "proj-mdoolse";
    case Method::nn_doolse: return "nn-doolse";
    case Method::nn_mdoolse: return "nn-mdoolse";
    case Method::mle: return "mle";
    case Method::remle: return "remle";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "ne") return Method::ne;
  if (name == "proj-doolse") return Method::projection_doolse;
  if (name == "proj-mdoolse") return Method::projection_mdoolse;
  if (name == "doolse" || name == "nn-doolse") return Method::nn_doolse;
  if (name == "mdoolse" || name == "nn-mdoolse") return Method::nn_mdoolse;
  if (name == "mle") return Method::mle;
  if (name == "remle") return Method::remle;
  throw Error(ErrorCode::parse_error, "unknown estimation method \"" + std::string(name) + "\"");
}

VarianceComponents EstimationResult::components() const {
  if (has_negative)
    throw Error(ErrorCode::domain_error,
                std::string(label()) + " estimate lies outside the parameter space");
  return VarianceComponents(estimate);
}

EstimationResult estimate(Method method, const ProjectionCache& cache, const DesignSet& design) {
  EstimationResult r;
  r.method = method;
  switch (method) {
    case Method::ne: {
      r.estimate = estimate_ne(cache, design).values();
      r.degenerate_residual = r.estimate(0) == 0.0;
      break;
    }
    case Method::projection_doolse:
    case Method::projection_mdoolse: {
      const auto variant =
          method == Method::projection_doolse ? DoolseVariant::doolse : DoolseVariant::mdoolse;
      const auto gram = gram_system(cache, design, variant);
      const auto u = estimate_projection_doolse(gram);
      r.estimate = u.values;
      r.has_negative = u.has_negative;
      r.degenerate_residual = residual_in_random_span(gram);
      break;
    }
    case Method::nn_doolse:
    case Method::nn_mdoolse: {
      const auto variant =
          method == Method::nn_doolse ? DoolseVariant::doolse : DoolseVariant::mdoolse;
      auto sol = estimate_nn_doolse(gram_system(cache, design, variant));
      r.estimate = sol.nu_hat.values();
      r.degenerate_residual = sol.degenerate_residual;
      r.kkt = std::move(sol);
      break;
    }
    case Method::mle:
    case Method::remle: {
      auto res = estimate_remle(cache, design,
                                method == Method::mle ? Likelihood::ml : Likelihood::reml);
      r.estimate = res.solution.nu_hat.values();
      r.degenerate_residual = !res.exists;
      r.loglik = res.loglik;
      r.kkt = std::move(res.solution);
      break;
    }
  }
  return r;
}

}  // namespace fdslrm
