#pragma once

#include <array>
#include <cstdint>

namespace fdslrm {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Sequential stream over Philox blocks (block, 0, 0, 0) for block = 0, 1, ...
/// with standard normals by Box-Muller.
class PhiloxStream {
 public:
  explicit PhiloxStream(Philox4x64::Key key) noexcept : key_(key) {}

  std::uint64_t next() noexcept;
  /// ((x >> 11) + 1) * 2^-53, in (0, 1].
  double uniform_open_zero() noexcept;
  /// (x >> 11) * 2^-53, in [0, 1).
  double uniform() noexcept;
  double normal() noexcept;

 private:
  Philox4x64::Key key_;
  std::uint64_t block_ = 0;
  Philox4x64::Counter buffer_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fdslrm
