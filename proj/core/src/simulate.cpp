#include "fdslrm/simulate.hpp"

#include "fdslrm/error.hpp"
#include "fdslrm/philox.hpp"

#include <cmath>

namespace fdslrm {

void SimulationConfig::validate() const {
  spec.validate();
  if (replicates < 1) throw Error(ErrorCode::invalid_model, "replicates must be at least 1");
  if (beta.size() != spec.k())
    throw Error(ErrorCode::length_mismatch, "beta must have one entry per trend term");
  nu_true.require_size(spec.l(), "simulation");
}

GaussianSampler::GaussianSampler(SimulationConfig config)
    : config_(std::move(config)), design_((config_.validate(), realize(config_.spec))) {
  mean_ = VectorXd::Zero(design_.n());
  if (design_.k() > 0) mean_.noalias() = design_.F() * config_.beta;
  sd_y_ = config_.nu_true.random().cwiseSqrt();
}

Replicate GaussianSampler::draw(long index) const {
  const long n = design_.n();
  const long l = design_.l();
  PhiloxStream stream({config_.seed, static_cast<std::uint64_t>(index)});
  Replicate r;
  r.y.resize(l);
  for (long j = 0; j < l; ++j) r.y(j) = sd_y_(j) * stream.normal();
  const double sd_w = std::sqrt(config_.nu_true.noise());
  r.w.resize(n);
  for (long t = 0; t < n; ++t) r.w(t) = sd_w * stream.normal();
  r.x = mean_ + r.w;
  if (l > 0) r.x.noalias() += design_.V() * r.y;
  return r;
}

std::vector<Replicate> sample(const SimulationConfig& config) {
  const GaussianSampler sampler(config);
  std::vector<Replicate> out;
  out.reserve(static_cast<std::size_t>(sampler.size()));
  for (long r = 0; r < sampler.size(); ++r) out.push_back(sampler.draw(r));
  return out;
}

}  // namespace fdslrm
