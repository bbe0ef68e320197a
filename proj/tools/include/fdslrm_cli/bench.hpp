#pragma once

#include <cstdint>
#include <vector>

namespace fdslrm::cli {

struct BenchOptions {
  std::vector<long> n_grid{1000, 10000, 100000, 1000000};
  std::vector<long> l_grid{4};
  std::uint64_t seed = 20190101;
  int runs = 11;
  double min_batch_ns = 2e6;  // small n: repeat inside one timed run up to this
};

struct BenchPoint {
  long n = 0;
  long l = 0;
  double median_ns = 0;  // per call: assembly of q and G plus the KKT scan
  int runs = 0;
  long batch = 1;
};

/// NN-MDOOLSE timing on a synthetic orthogonal model with trend
/// (1, cos, sin at harmonic 1) and l random harmonics from 2 upwards.
/// The design is realized outside the timed region.
std::vector<BenchPoint> bench_nn_mdoolse(const BenchOptions& options);

/// Least-squares slope of log2(time) against log2(n), i.e. the growth
/// factor per doubling is 2^slope.
double loglog_slope(const std::vector<BenchPoint>& points);

}  // namespace fdslrm::cli
