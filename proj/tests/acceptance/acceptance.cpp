// Acceptance suite: one PASS/FAIL/SKIP line per criterion, non-zero exit on any FAIL.

#include "fdslrm/eblupne.hpp"
#include "fdslrm/estimators.hpp"
#include "fdslrm/mme.hpp"
#include "fdslrm/model_io.hpp"
#include "fdslrm/simulate.hpp"
#include "fdslrm_cli/bench.hpp"
#include "fdslrm_cli/commands.hpp"
#include "fdslrm_cli/csv.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace fdslrm;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

struct Instance {
  DesignSet design;
  Eigen::VectorXd x;
  ProjectionCache cache;
};

Instance orthogonal_instance(std::mt19937_64& rng, oracle::RandomModelOptions opt = {}) {
  DesignSet d = realize(oracle::random_spec(rng, true, opt));
  const auto nu = oracle::random_nu(rng, d.l(), opt.zero_probability);
  Eigen::VectorXd x = oracle::gaussian_series(rng, d, Eigen::VectorXd::Ones(d.k()), nu);
  ProjectionCache c = build_projection(d, x);
  return {std::move(d), std::move(x), std::move(c)};
}

// Certificate bookkeeping shared by criteria 3 and 8.
struct CertificateTally {
  long checked = 0;
  long failed = 0;
  double worst = 0.0;

  void add(const GramSystem& g, const KktSolution& s) {
    const auto c = verify_kkt(g, s);
    ++checked;
    worst = std::max(worst, c.stationarity_residual);
    if (!(c.primal_feasible && c.dual_feasible && c.slackness_exact && c.stationarity_residual < 1e-9))
      ++failed;
  }
};

CertificateTally g_certificates;

// 1. T* identities on 200 random models.
Outcome t_star_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int zero_models = 0;
  for (int i = 0; i < 200; ++i) {
    const DesignSet d = realize(oracle::random_spec(rng, i % 2 == 0));
    const auto nu = oracle::random_nu(rng, d.l());
    if ((nu.random().array() == 0.0).any()) ++zero_models;
    worst = std::max(worst, t_star_identities(d, nu).max());
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-9 && secs < 10.0;
  return {ok ? Status::pass : Status::fail,
          "max residual " + fmt(worst) + ", " + std::to_string(zero_models) +
              " models with some nu_j = 0, " + fmt(secs) + " s"};
}

// 2. (RE)ML optimality of NN-(M)DOOLSE against random feasible points and Nelder-Mead.
Outcome likelihood_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = std::numeric_limits<double>::infinity();  // min of loglik(best) - loglik(point)
  double worst_rel = 0.0;   // Nelder-Mead disagreement
  for (int i = 0; i < 100; ++i) {
    const auto inst = orthogonal_instance(rng, {10, 40, 3, 3, 0.3});
    for (auto variant : {Likelihood::ml, Likelihood::reml}) {
      const auto r = estimate_remle(inst.cache, inst.design, variant);
      g_certificates.add(gram_system(inst.cache, inst.design,
                                     variant == Likelihood::ml ? DoolseVariant::doolse
                                                               : DoolseVariant::mdoolse),
                         r.solution);
      const Eigen::VectorXd& best = r.solution.nu_hat.values();
      const double top = *r.loglik;
      for (int s = 0; s < 1000; ++s) {
        Eigen::VectorXd p(best.size());
        p(0) = best(0) * (0.1 + 3.0 * u(rng));
        for (long j = 1; j < p.size(); ++j)
          p(j) = u(rng) < 0.3 ? 0.0 : 3.0 * (best(j) + 0.1) * u(rng);
        const double v = loglik(inst.cache, inst.design, VarianceComponents(p), variant);
        worst_gap = std::min(worst_gap, (top - v) / std::max(1.0, std::abs(top)));
      }
      const auto neg = [&](const Eigen::VectorXd& s) {
        return -oracle::loglik(inst.design, inst.x, VarianceComponents(s.cwiseAbs2()),
                               variant == Likelihood::reml);
      };
      Eigen::VectorXd s0 = Eigen::VectorXd::Constant(best.size(), 1.0);
      s0(0) = std::sqrt(inst.cache.eps_sq / static_cast<double>(inst.design.n()));
      Eigen::VectorXd s = oracle::nelder_mead(neg, s0, 0.5, 1e-9, 4000);
      s = oracle::nelder_mead(neg, s, 0.05, 1e-10, 4000);
      const Eigen::VectorXd nm = s.cwiseAbs2();
      worst_rel = std::max(worst_rel, (nm - best).cwiseAbs().maxCoeff() / best.cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_gap >= -1e-9 && worst_rel <= 1e-4 && secs < 120.0;
  return {ok ? Status::pass : Status::fail,
          "worst random-point gap " + fmt(worst_gap) + ", worst Nelder-Mead rel. diff " +
              fmt(worst_rel) + ", " + fmt(secs) + " s"};
}

// 3. KKT certificate on every NN-(M)DOOLSE output produced here.
Outcome kkt_certificates() {
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 500; ++i) {
    const auto inst = orthogonal_instance(rng, {10, 200, 4, 6, 0.5});
    for (auto v : {DoolseVariant::doolse, DoolseVariant::mdoolse}) {
      const auto g = gram_system(inst.cache, inst.design, v);
      g_certificates.add(g, estimate_nn_doolse(g));
    }
  }
  // Boundary-heavy arrow systems with tiny projections.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const long l = 1 + static_cast<long>(rng() % 6);
    Eigen::VectorXd norms(l), q(l + 1);
    double explained = 0.0;
    for (long j = 0; j < l; ++j) {
      norms(j) = 1.0 + 50.0 * u(rng);
      q(j + 1) = u(rng) < 0.5 ? 1e-3 * u(rng) : 100.0 * u(rng);
      explained += q(j + 1) / norms(j);
    }
    q(0) = explained + 10.0 * u(rng) + 1e-3;
    const auto g = GramSystem::from_arrow(static_cast<double>(l) + 5.0 + 100.0 * u(rng), norms, q);
    g_certificates.add(g, estimate_nn_doolse(g));
  }
  const bool ok = g_certificates.failed == 0;
  return {ok ? Status::pass : Status::fail,
          std::to_string(g_certificates.checked) + " solutions, " +
              std::to_string(g_certificates.failed) + " failures, worst stationarity " +
              fmt(g_certificates.worst)};
}

// 4. EBLUP-NE final_j = rho_j^2 NE_j.
Outcome shrinkage_identity() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto inst = orthogonal_instance(rng);
    const auto ne = estimate_ne(inst.cache, inst.design);
    for (Method m : {Method::ne, Method::nn_doolse, Method::nn_mdoolse, Method::mle, Method::remle}) {
      const auto r = eblup_ne(inst.design, inst.x, m);
      for (long j = 0; j < inst.design.l(); ++j) {
        const double expected = r.rho(j) * r.rho(j) * ne[j + 1];
        const double diff = std::abs(r.final[j + 1] - expected);
        if (diff == 0.0) continue;
        worst = std::max(worst, diff / std::abs(expected));
      }
    }
  }
  return {worst <= 1e-12 ? Status::pass : Status::fail, "worst relative deviation " + fmt(worst)};
}

// 5. BLUP-NE dominates NE in bias, dispersion and MSE.
Outcome dominance() {
  std::mt19937_64 rng(1005);
  long violations = 0;
  long comparisons = 0;
  for (int i = 0; i < 200; ++i) {
    const DesignSet d = realize(oracle::random_spec(rng, true));
    const auto nu = oracle::random_nu(rng, d.l());
    const auto ne = blup_ne_moments(d, nu, MomentEstimator::ne);
    const auto bl = blup_ne_moments(d, nu, MomentEstimator::blup_ne);
    const auto s = schur_matrices(d, nu, false);
    const Eigen::MatrixXd w_inv = d.w().inverse();
    for (long j = 0; j < d.l(); ++j) {
      ++comparisons;
      if (std::abs(bl.bias(j)) > std::abs(ne.bias(j)) || bl.dispersion(j) > ne.dispersion(j) ||
          bl.mse(j) > ne.mse(j))
        ++violations;
      if (nu[j + 1] > 0.0 && !(s.w_star_inv(j, j) < w_inv(j, j))) ++violations;
    }
  }
  return {violations == 0 ? Status::pass : Status::fail,
          std::to_string(comparisons) + " components, " + std::to_string(violations) + " violations"};
}

// 6. Monte Carlo check of the orthogonal BLUP-NE moments.
Outcome monte_carlo_moments() {
  const auto t0 = Clock::now();
  SimulationConfig cfg;
  cfg.spec = load_model(fs::path(FDSLRM_MODELS_DIR) / "cyberattacks.json");
  cfg.beta = Eigen::Vector3d(3.0, 0.5, -0.2);
  cfg.nu_true = VarianceComponents(Eigen::Vector3d(0.06, 0.024, 0.014));
  cfg.replicates = 100000;
  cfg.seed = 20190601;
  const GaussianSampler sampler(cfg);
  const DesignSet& d = sampler.design();
  const Eigen::VectorXd rho = shrinkage_factors(d, cfg.nu_true);

  const double m = static_cast<double>(cfg.replicates);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sum2 = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> values(static_cast<std::size_t>(cfg.replicates));
  for (long r = 0; r < cfg.replicates; ++r) {
    const auto cache = build_projection(d, sampler.draw(r).x);
    const Eigen::VectorXd y = blup_from_residuals(cache, d, cfg.nu_true);
    values[static_cast<std::size_t>(r)] = y.cwiseAbs2();
    sum += values[static_cast<std::size_t>(r)];
  }
  const Eigen::Vector2d mean = sum / m;
  double cross = 0.0, cross2 = 0.0;
  for (const auto& v : values) {
    const Eigen::Vector2d c = v - mean;
    sum2 += c.cwiseAbs2();
    cross += c(0) * c(1);
    cross2 += c(0) * c(0) * c(1) * c(1);
  }
  const Eigen::Vector2d var = sum2 / (m - 1.0);
  const double cov = cross / (m - 1.0);
  const double cov_se = std::sqrt(std::max(cross2 / m - (cross / m) * (cross / m), 0.0) / m);

  bool ok = true;
  std::ostringstream detail;
  for (long j = 0; j < 2; ++j) {
    const double nuj = cfg.nu_true[j + 1];
    const double e = rho(j) * nuj;
    const double dispersion = 2.0 * rho(j) * rho(j) * nuj * nuj;
    const double se = std::sqrt(var(j) / m);
    const double z = (mean(j) - e) / se;
    const double rel = std::abs(var(j) - dispersion) / dispersion;
    ok = ok && std::abs(z) <= 4.0 && rel <= 0.10;
    detail << "j=" << j + 1 << ": mean z " << fmt(z) << ", var rel " << fmt(rel) << "; ";
  }
  const double zc = cov / cov_se;
  ok = ok && std::abs(zc) <= 4.0;
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  detail << "cross-cov z " << fmt(zc) << ", " << fmt(secs) << " s";
  return {ok ? Status::pass : Status::fail, detail.str()};
}

// 7. Linear scaling of NN-MDOOLSE in n at l = 4.
Outcome linear_scaling() {
  cli::BenchOptions opt;
  opt.n_grid = {1000, 10000, 100000, 1000000};
  opt.l_grid = {4};
  opt.runs = 11;
  const auto points = cli::bench_nn_mdoolse(opt);
  const double slope = cli::loglog_slope(points);
  const double ratio = std::exp2(slope);
  bool ok = ratio >= 1.6 && ratio <= 2.6;
  std::ostringstream detail;
  detail << "fitted ratio per doubling " << fmt(ratio) << " (segments";
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double seg = std::exp2(std::log2(points[i].median_ns / points[i - 1].median_ns) /
                                 std::log2(static_cast<double>(points[i].n) / points[i - 1].n));
    ok = ok && seg >= 1.6 && seg <= 2.6;
    detail << ' ' << fmt(seg);
  }
  const double top_ms = points.back().median_ns / 1e6;
  ok = ok && top_ms < 100.0;
  detail << "), n=1e6 median " << fmt(top_ms) << " ms";
  return {ok ? Status::pass : Status::fail, detail.str()};
}

// 8. Degenerate residual and singular D.
Outcome degenerate_handling() {
  bool ok = true;
  std::ostringstream detail;
  const DesignSet d = realize({24,
                               {TermSpec::constant(), TermSpec::cosine_harmonic(1, 24), TermSpec::sine_harmonic(1, 24)},
                               {TermSpec::cosine_harmonic(3, 24), TermSpec::sine_harmonic(3, 24),
                                TermSpec::cosine_harmonic(4, 24), TermSpec::sine_harmonic(4, 24)}});
  const Eigen::Vector4d alpha(1.5, -0.7, 0.0, 2.0);
  const Eigen::VectorXd x = d.F() * Eigen::Vector3d(10, 1, -1) + d.V() * alpha;
  const auto cache = build_projection(d, x);
  try {
    for (auto v : {DoolseVariant::doolse, DoolseVariant::mdoolse}) {
      const auto g = gram_system(cache, d, v);
      const auto s = estimate_nn_doolse(g);
      ok = ok && s.degenerate_residual && s.nu_hat[0] == 0.0;
      for (long j = 0; j < 4; ++j)
        ok = ok && std::abs(s.nu_hat[j + 1] - alpha(j) * alpha(j)) <= 1e-10 * (1.0 + alpha(j) * alpha(j));
      g_certificates.add(g, s);
      const auto c = verify_kkt(g, s);
      ok = ok && c.primal_feasible && c.dual_feasible && c.slackness_exact && c.stationarity_residual < 1e-9;
    }
    const auto r = estimate_remle(cache, d, Likelihood::reml);
    ok = ok && !r.exists && !r.loglik;
    detail << "eps in span(V) flagged with nu_0 = 0; ";
  } catch (const std::exception& e) {
    ok = false;
    detail << "exception " << e.what() << "; ";
  }

  std::mt19937_64 rng(1008);
  double worst_identity = 0.0;
  long cert_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const DesignSet dd = realize(oracle::random_spec(rng, i % 2 == 0));
    Eigen::VectorXd nu = oracle::random_nu(rng, dd.l()).values();
    nu(1 + static_cast<long>(rng() % static_cast<unsigned long>(dd.l()))) = 0.0;
    const VarianceComponents vc(nu);
    worst_identity = std::max(worst_identity, t_star_identities(dd, vc).max());
    const auto s = schur_matrices(dd, vc, false);
    ok = ok && s.singular_d && !s.w_star;
    if (dd.is_orthogonal()) {
      const Eigen::VectorXd xx = oracle::gaussian_series(rng, dd, Eigen::VectorXd::Ones(dd.k()), vc);
      const auto g = gram_system(build_projection(dd, xx), dd, DoolseVariant::mdoolse);
      const auto sol = estimate_nn_doolse(g);
      const auto c = verify_kkt(g, sol);
      if (!(c.primal_feasible && c.dual_feasible && c.slackness_exact && c.stationarity_residual < 1e-9))
        ++cert_fail;
      g_certificates.add(g, sol);
    }
  }
  ok = ok && worst_identity < 1e-9 && cert_fail == 0;
  detail << "singular D: T* identities max residual " << fmt(worst_identity) << ", KKT failures " << cert_fail;
  return {ok ? Status::pass : Status::fail, detail.str()};
}

// 9. Reproduction of the published estimates, only when the data sets are supplied.
struct PublishedRows {
  const char* model;
  const char* file;
  bool log_transform;
  int decimals;
  // ne, mle, remle estimates and EBLUP-NE for each, in that order.
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<double>> eblup;
  std::vector<double> estimate_norms;
  std::vector<double> eblup_norms;
};

fs::path find_data(const char* file) {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("FDSLRM_DATA_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(FDSLRM_TEST_DATA_DIR);
  for (const auto& dir : dirs)
    if (fs::exists(dir / file)) return dir / file;
  return {};
}

Outcome published_reproduction() {
  const std::vector<PublishedRows> tables{
      {"electricity_toy1.json", "electricity.csv", false, 2,
       {{3.53, 0.37, 1.86, 0.00, 1.26}, {2.86, 0.13, 1.62, 0.00, 1.03}, {3.34, 0.09, 1.59, 0.00, 0.99}},
       {{3.53, 0.12, 1.39, 0.00, 0.83}, {3.53, 0.05, 1.42, 0.00, 0.84}, {3.53, 0.02, 1.35, 0.00, 0.77}},
       {4.20, 3.45, 3.83},
       {3.89, 3.90, 3.86}},
      {"electricity_toy2.json", "electricity.csv", false, 2,
       {{1.09, 2.97, 1.76, 0.37, 1.86}, {0.93, 2.89, 1.68, 0.29, 1.79}, {1.09, 2.87, 1.67, 0.28, 1.77}},
       {{1.09, 2.79, 1.59, 0.24, 1.69}, {1.09, 2.81, 1.61, 0.23, 1.71}, {1.09, 2.79, 1.58, 0.21, 1.69}},
       {4.09, 3.91, 3.93},
       {3.80, 3.83, 3.79}},
      {"tourism.json", "tourism.csv", false, 3,
       {{0.108, 0.004, 0.230, 0.022}, {0.103, 0.001, 0.228, 0.021}, {0.108, 0.001, 0.227, 0.021}},
       {{0.108, 0.001, 0.225, 0.020}, {0.108, 0.000, 0.225, 0.020}, {0.108, 0.000, 0.225, 0.020}},
       {0.255, 0.251, 0.253},
       {0.250, 0.250, 0.250}},
      {"cyberattacks.json", "cyberattacks.csv", true, 4,
       {{0.0593, 0.0255, 0.0155}, {0.0560, 0.0239, 0.0139}, {0.0593, 0.0238, 0.0138}},
       {{0.0593, 0.0225, 0.0127}, {0.0593, 0.0225, 0.0125}, {0.0593, 0.0223, 0.0124}},
       {0.0664, 0.0624, 0.0654},
       {0.0647, 0.0647, 0.0646}},
  };
  const std::vector<Method> methods{Method::ne, Method::mle, Method::remle};
  int datasets = 0;
  long cells = 0, misses = 0;
  std::ostringstream misses_detail;
  for (const auto& t : tables) {
    const fs::path data = find_data(t.file);
    if (data.empty()) continue;
    ++datasets;
    Eigen::VectorXd x = cli::read_series(data);
    if (t.log_transform) x = x.array().log().matrix();
    const ModelSpec spec = load_model(fs::path(FDSLRM_MODELS_DIR) / t.model);
    const double tol = 0.5 * std::pow(10.0, -t.decimals) + 1e-9;
    const auto check = [&](double got, double want, const std::string& what) {
      ++cells;
      if (std::abs(got - want) > tol) {
        ++misses;
        misses_detail << ' ' << t.model << ':' << what << '=' << fmt(got, 6) << "!=" << want;
      }
    };
    const auto check_row = [&](const nlohmann::json& est, const std::vector<double>& want,
                               double want_norm, const std::string& what) {
      for (std::size_t j = 0; j < want.size(); ++j)
        check(est.at(j).get<double>(), want[j], what + "[" + std::to_string(j) + "]");
      double sq = 0.0;
      for (const auto& v : est) sq += v.get<double>() * v.get<double>();
      check(std::sqrt(sq), want_norm, what + ".norm");
    };
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const std::string name(method_name(methods[m]));
      cli::FitRequest req{spec, x, {name, "eblupne"}, methods[m]};
      const auto report = cli::run_fit(req).report;
      for (const auto& r : report.at("results")) {
        if (r.at("method") == name)
          check_row(r.at("estimate"), t.estimates[m], t.estimate_norms[m], name);
        else
          check_row(r.at("estimate"), t.eblup[m], t.eblup_norms[m], "eblupne(" + name + ")");
      }
    }
  }
  if (datasets == 0)
    return {Status::skip, "no data sets found (set FDSLRM_DATA_DIR to a directory with "
                          "electricity.csv, tourism.csv, cyberattacks.csv)"};
  return {misses == 0 ? Status::pass : Status::fail,
          std::to_string(datasets) + " model(s), " + std::to_string(cells) + " printed values, " +
              std::to_string(misses) + " outside printed precision" + misses_detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 T* identities on random models", t_star_suite},
      {"2 NN-(M)DOOLSE maximizes the (restricted) likelihood", likelihood_equivalence},
      {"3 KKT certificates", kkt_certificates},
      {"4 EBLUP-NE shrinkage identity", shrinkage_identity},
      {"5 BLUP-NE dominates NE", dominance},
      {"6 Monte Carlo BLUP-NE moments", monte_carlo_moments},
      {"7 linear scaling in n", linear_scaling},
      {"8 degenerate residual and singular D", degenerate_handling},
      {"9 published estimates from supplied data", published_reproduction},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failures;
    std::cout << tag << "  criterion " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
