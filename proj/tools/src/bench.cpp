#include "fdslrm_cli/bench.hpp"

#include "fdslrm/error.hpp"
#include "fdslrm/estimators.hpp"
#include "fdslrm/projection.hpp"
#include "fdslrm/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace fdslrm::cli {

namespace {

ModelSpec bench_model(long n, long l) {
  ModelSpec spec;
  spec.n = n;
  spec.trend = {TermSpec::constant(), TermSpec::cosine_harmonic(1, n), TermSpec::sine_harmonic(1, n)};
  for (long j = 0; j < l; ++j) {
    const long h = 2 + j / 2;
    spec.random.push_back(j % 2 == 0 ? TermSpec::cosine_harmonic(h, n)
                                     : TermSpec::sine_harmonic(h, n));
  }
  return spec;
}

double elapsed_ns(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<BenchPoint> bench_nn_mdoolse(const BenchOptions& options) {
  if (options.runs < 1) throw Error(ErrorCode::invalid_model, "bench needs at least one run");
  if (!std::is_sorted(options.n_grid.begin(), options.n_grid.end()))
    throw Error(ErrorCode::parse_error, "n grid must be ascending");
  std::vector<BenchPoint> points;
  volatile double sink = 0.0;
  for (long l : options.l_grid) {
    for (long n : options.n_grid) {
      SimulationConfig cfg;
      cfg.spec = bench_model(n, l);
      cfg.beta = VectorXd::Constant(3, 1.0);
      cfg.nu_true = VarianceComponents(VectorXd::Constant(l + 1, 1.0));
      cfg.seed = options.seed;
      const GaussianSampler sampler(cfg);
      const DesignSet& design = sampler.design();
      const VectorXd x = sampler.draw(0).x;

      const auto once = [&] {
        const auto cache = build_projection(design, x);
        const auto sol = estimate_nn_doolse(gram_system(cache, design, DoolseVariant::mdoolse));
        sink = sink + sol.nu_hat.noise();
      };
      // Calibrate the batch so each timed run is long enough to measure.
      long batch = 1;
      for (;;) {
        const auto t0 = std::chrono::steady_clock::now();
        for (long b = 0; b < batch; ++b) once();
        if (elapsed_ns(t0) >= options.min_batch_ns || batch >= (1L << 20)) break;
        batch *= 2;
      }
      std::vector<double> times;
      for (int r = 0; r < options.runs; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        for (long b = 0; b < batch; ++b) once();
        times.push_back(elapsed_ns(t0) / static_cast<double>(batch));
      }
      std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
      points.push_back({n, l, times[times.size() / 2], options.runs, batch});
    }
  }
  (void)sink;
  return points;
}

double loglog_slope(const std::vector<BenchPoint>& points) {
  if (points.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double x = std::log2(static_cast<double>(p.n));
    const double y = std::log2(p.median_ns);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace fdslrm::cli
