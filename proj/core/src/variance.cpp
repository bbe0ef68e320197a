#include "fdslrm/variance.hpp"

#include "fdslrm/error.hpp"

#include <cmath>
#include <sstream>

namespace fdslrm {

VarianceComponents::VarianceComponents(Eigen::VectorXd nu) : nu_(std::move(nu)) {
  if (nu_.size() < 1) throw Error(ErrorCode::domain_error, "variance vector must contain nu_0");
  for (long j = 0; j < nu_.size(); ++j) {
    if (!std::isfinite(nu_(j)) || nu_(j) < 0.0) {
      std::ostringstream msg;
      msg << "nu_" << j << " = " << nu_(j) << " is outside [0, inf)";
      throw Error(ErrorCode::domain_error, msg.str());
    }
  }
}

VarianceComponents VarianceComponents::white_noise(double nu0, long l) {
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(l + 1);
  nu(0) = nu0;
  return VarianceComponents(std::move(nu));
}

void VarianceComponents::require_positive_noise(const char* where) const {
  if (!positive_noise())
    throw Error(ErrorCode::domain_error, std::string(where) + " requires nu_0 > 0");
}

void VarianceComponents::require_size(long l, const char* where) const {
  if (this->l() != l) {
    std::ostringstream msg;
    msg << where << ": expected " << l + 1 << " variance components, got " << nu_.size();
    throw Error(ErrorCode::length_mismatch, msg.str());
  }
}

}  // namespace fdslrm
