#include "fdslrm/error.hpp"
#include "fdslrm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fdslrm {

namespace {

constexpr long kMaxPatternBits = 62;

// D_b diagonal entry: ||v_j||^4 when b_j = 1, -1 when b_j = 0.
inline double db_entry(double norm_sq, bool bj) { return bj ? norm_sq * norm_sq : -1.0; }

void check_pattern(const GramSystem& gram, const ActivePattern& b) {
  if (static_cast<long>(b.size()) != gram.l())
    throw Error(ErrorCode::length_mismatch, "active pattern must have l entries");
}

ActivePattern pattern_from_mask(std::uint64_t mask, long l) {
  ActivePattern b(static_cast<std::size_t>(l));
  for (long j = 0; j < l; ++j) b[static_cast<std::size_t>(j)] = (mask >> (l - 1 - j)) & 1u;
  return b;
}

// Visits masks by descending popcount; within a popcount in increasing
// numeric order, which with b_1 as the top bit is lexicographic order.
template <class Visitor>
void for_each_pattern(long l, Visitor&& visit) {
  if (l > kMaxPatternBits)
    throw Error(ErrorCode::invalid_model, "too many random components for pattern enumeration");
  const std::uint64_t limit = std::uint64_t{1} << l;
  for (long c = l; c >= 0; --c) {
    if (c == 0) {
      if (!visit(std::uint64_t{0})) return;
      continue;
    }
    std::uint64_t mask = (std::uint64_t{1} << c) - 1;
    while (mask < limit) {
      if (!visit(mask)) return;
      // Gosper's hack: next larger integer with the same popcount.
      const std::uint64_t low = mask & (~mask + 1);
      const std::uint64_t ripple = mask + low;
      mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
  }
}

double acceptance_band(const GramSystem& gram, const KktOptions& options) {
  const double qmax = gram.q.size() > 0 ? gram.q.cwiseAbs().maxCoeff() : 0.0;
  return options.acceptance * std::max(1.0, qmax);
}

}  // namespace

MatrixXd kkt_matrix(const GramSystem& gram, const ActivePattern& b) {
  check_pattern(gram, b);
  MatrixXd k = gram.G;
  for (long j = 0; j < gram.l(); ++j) {
    if (!b[static_cast<std::size_t>(j)]) {
      k(0, j + 1) = 0.0;
      k(j + 1, j + 1) = -1.0;
    }
  }
  return k;
}

MatrixXd kkt_matrix_inverse(const GramSystem& gram, const ActivePattern& b) {
  check_pattern(gram, b);
  const long l = gram.l();
  VectorXd db_inv(l);
  VectorXd row(l);  // b' G_V D_b^{-1}
  VectorXd col(l);  // D_b^{-1} G_V 1
  double phi = gram.n_star;
  for (long j = 0; j < l; ++j) {
    const bool bj = b[static_cast<std::size_t>(j)];
    const double nj = gram.norms_sq(j);
    db_inv(j) = 1.0 / db_entry(nj, bj);
    row(j) = bj ? nj * db_inv(j) : 0.0;
    col(j) = nj * db_inv(j);
    phi -= row(j) * nj;
  }
  MatrixXd inv(l + 1, l + 1);
  inv(0, 0) = 1.0;
  inv.block(0, 1, 1, l) = -row.transpose();
  inv.block(1, 0, l, 1) = -col;
  inv.bottomRightCorner(l, l) = col * row.transpose();
  inv.bottomRightCorner(l, l).diagonal() += phi * db_inv;
  return inv / phi;
}

VectorXd kkt_solve(const GramSystem& gram, const ActivePattern& b) {
  check_pattern(gram, b);
  const long l = gram.l();
  double phi = gram.n_star;
  double num = gram.q(0);
  for (long j = 0; j < l; ++j) {
    if (!b[static_cast<std::size_t>(j)]) continue;
    const double nj = gram.norms_sq(j);
    const double dj = db_entry(nj, true);
    phi -= nj * nj / dj;
    num -= nj * gram.q(j + 1) / dj;
  }
  VectorXd g(l + 1);
  g(0) = num / phi;
  for (long j = 0; j < l; ++j) {
    const double nj = gram.norms_sq(j);
    g(j + 1) = (gram.q(j + 1) - nj * g(0)) / db_entry(nj, b[static_cast<std::size_t>(j)]);
  }
  return g;
}

std::vector<ActivePattern> kkt_scan_order(long l) {
  std::vector<ActivePattern> order;
  for_each_pattern(l, [&](std::uint64_t mask) {
    order.push_back(pattern_from_mask(mask, l));
    return true;
  });
  return order;
}

std::vector<ActivePattern> kkt_feasible_patterns(const GramSystem& gram, const KktOptions& options) {
  const double band = acceptance_band(gram, options);
  std::vector<ActivePattern> feasible;
  for_each_pattern(gram.l(), [&](std::uint64_t mask) {
    auto b = pattern_from_mask(mask, gram.l());
    if (kkt_solve(gram, b).minCoeff() >= -band) feasible.push_back(std::move(b));
    return true;
  });
  return feasible;
}

KktSolution estimate_nn_doolse(const GramSystem& gram, const KktOptions& options) {
  const long l = gram.l();
  KktSolution sol;
  sol.lagrange = VectorXd::Zero(l);

  if (residual_in_random_span(gram)) {
    // eps = sum_j alpha_j v_j: nu_0 = 0 and nu_j = alpha_j^2 solve the KKT system.
    VectorXd nu(l + 1);
    nu(0) = 0.0;
    sol.active_pattern.assign(static_cast<std::size_t>(l), false);
    for (long j = 0; j < l; ++j) {
      nu(j + 1) = gram.q(j + 1) / (gram.norms_sq(j) * gram.norms_sq(j));
      sol.active_pattern[static_cast<std::size_t>(j)] = nu(j + 1) > 0.0;
    }
    sol.nu_hat = VarianceComponents(std::move(nu));
    sol.degenerate_residual = true;
    return sol;
  }

  const double band = acceptance_band(gram, options);
  std::uint64_t best_mask = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  VectorXd best_g;
  bool accepted = false;
  for_each_pattern(l, [&](std::uint64_t mask) {
    ++sol.systems_tried;
    const auto b = pattern_from_mask(mask, l);
    VectorXd g = kkt_solve(gram, b);
    const double gmin = g.minCoeff();
    if (gmin > best_min) {
      best_min = gmin;
      best_mask = mask;
      best_g = std::move(g);
    }
    if (gmin >= -band) {
      accepted = true;
      return false;
    }
    return true;
  });

  sol.fallback = !accepted;
  sol.active_pattern = pattern_from_mask(best_mask, l);
  VectorXd nu(l + 1);
  nu(0) = std::max(best_g(0), 0.0);
  for (long j = 0; j < l; ++j) {
    const double gj = std::max(best_g(j + 1), 0.0);
    if (std::abs(best_g(j + 1)) <= band) sol.boundary_tie = true;
    if (sol.active_pattern[static_cast<std::size_t>(j)]) {
      nu(j + 1) = gj;
    } else {
      nu(j + 1) = 0.0;
      sol.lagrange(j) = gj;
    }
  }
  sol.nu_hat = VarianceComponents(std::move(nu));
  return sol;
}

KktCertificate verify_kkt(const GramSystem& gram, const KktSolution& solution) {
  const long l = gram.l();
  const VectorXd& nu = solution.nu_hat.values();
  VectorXd lambda(l + 1);
  lambda(0) = 0.0;
  lambda.tail(l) = solution.lagrange;
  VectorXd grad = gram.G * nu - gram.q;
  if (!(nu(0) > 0.0)) lambda(0) = std::max(grad(0), 0.0);

  KktCertificate cert;
  cert.primal_feasible = (nu.array() >= 0.0).all();
  cert.dual_feasible = (lambda.array() >= 0.0).all();
  cert.slackness_exact = true;
  for (long j = 0; j <= l; ++j)
    if (nu(j) * lambda(j) != 0.0) cert.slackness_exact = false;
  const double qmax = gram.q.cwiseAbs().maxCoeff();
  const double resid = (grad - lambda).cwiseAbs().maxCoeff();
  cert.stationarity_residual = qmax > 0.0 ? resid / qmax : resid;
  return cert;
}

}  // namespace fdslrm
