#pragma once

#include <Eigen/Dense>

#include <vector>

namespace fdslrm {

struct PeriodogramOrdinate {
  long harmonic;     // h
  double frequency;  // 2*pi*h/n
  double power;      // (1/n) |sum_t x(t) exp(-i w_h t)|^2
};

/// Ordinates at the Fourier frequencies h = 1..floor(n/2), in harmonic order
/// unless sort_by_power is set (then descending power, ties by harmonic).
std::vector<PeriodogramOrdinate> periodogram(const Eigen::VectorXd& series,
                                             bool sort_by_power = false);

}  // namespace fdslrm
