#pragma once

#include <Eigen/Dense>

namespace fdslrm {

/// nu = (nu_0, nu_1, ..., nu_l): white-noise variance followed by the
/// variances of the random coefficients Y_j.
///
/// Construction enforces finite nu_j >= 0 for all j. nu_0 = 0 is admitted as
/// the boundary solution of the non-negative least-squares problems; any
/// routine that needs Sigma_nu to be invertible checks positive_noise().
class VarianceComponents {
 public:
  explicit VarianceComponents(Eigen::VectorXd nu);

  static VarianceComponents white_noise(double nu0, long l);

  const Eigen::VectorXd& values() const noexcept { return nu_; }
  double noise() const noexcept { return nu_(0); }
  double operator[](long j) const { return nu_(j); }
  long l() const noexcept { return nu_.size() - 1; }
  Eigen::VectorXd random() const { return nu_.tail(l()); }

  bool positive_noise() const noexcept { return nu_(0) > 0.0; }
  /// Throws Error(domain_error) mentioning `where` when nu_0 <= 0.
  void require_positive_noise(const char* where) const;
  /// Throws Error(length_mismatch) unless l() == l.
  void require_size(long l, const char* where) const;

  double norm() const { return nu_.norm(); }

 private:
  Eigen::VectorXd nu_;
};

}  // namespace fdslrm
