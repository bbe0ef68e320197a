#include "fdslrm/periodogram.hpp"

#include "fdslrm/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <numbers>

namespace fdslrm {

std::vector<PeriodogramOrdinate> periodogram(const Eigen::VectorXd& series, bool sort_by_power) {
  const long n = series.size();
  if (n < 2) throw Error(ErrorCode::length_mismatch, "periodogram needs at least 2 observations");

  // Starting the time index at 1 rather than 0 only rotates each DFT
  // coefficient by a unit phase, so magnitudes are unaffected.
  std::vector<double> in(series.data(), series.data() + n);
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  std::vector<PeriodogramOrdinate> result;
  result.reserve(static_cast<std::size_t>(n / 2));
  for (long h = 1; h <= n / 2; ++h) {
    const double power = std::norm(out[static_cast<std::size_t>(h)]) / static_cast<double>(n);
    result.push_back({h, 2.0 * std::numbers::pi * static_cast<double>(h) / static_cast<double>(n),
                      power});
  }
  if (sort_by_power) {
    std::stable_sort(result.begin(), result.end(),
                     [](const auto& a, const auto& b) { return a.power > b.power; });
  }
  return result;
}

}  // namespace fdslrm
