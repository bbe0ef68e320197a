#pragma once

#include "fdslrm/model.hpp"
#include "fdslrm/variance.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace fdslrm {

struct SimulationConfig {
  ModelSpec spec;
  VectorXd beta;
  VarianceComponents nu_true = VarianceComponents::white_noise(1.0, 0);
  long replicates = 1;
  std::uint64_t seed = 0;

  /// Throws Error(invalid_model) or Error(length_mismatch).
  void validate() const;
};

struct Replicate {
  VectorXd x;  // F beta + V Y + w
  VectorXd y;  // Y ~ N(0, D)
  VectorXd w;  // w ~ N(0, nu_0 I)
};

/// Replicate r uses the Philox key (seed, r) and draws l normals for Y, then
/// n normals for w, so any replicate can be generated on its own.
class GaussianSampler {
 public:
  static constexpr std::string_view algorithm = "philox4x64-10/box-muller/v1";

  explicit GaussianSampler(SimulationConfig config);

  const SimulationConfig& config() const noexcept { return config_; }
  const DesignSet& design() const noexcept { return design_; }
  long size() const noexcept { return config_.replicates; }

  Replicate draw(long index) const;

 private:
  SimulationConfig config_;
  DesignSet design_;
  VectorXd mean_;
  VectorXd sd_y_;
};

std::vector<Replicate> sample(const SimulationConfig& config);

}  // namespace fdslrm
