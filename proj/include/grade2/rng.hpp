#pragma once

// Counter-based Philox4x32-10 generator.  A stream is addressed by
// (seed, path) and every draw by (step, channel), so any increment can be
// regenerated without replaying the stream.

#include <array>
#include <cstdint>
#include <limits>

namespace grade2 {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Maps two 32-bit words to a double in [0, 1) with 53 random bits.
double to_unit(std::uint32_t hi, std::uint32_t lo);

/// Gaussian increments for one simulated path.
class WienerStream {
 public:
  WienerStream(std::uint64_t seed, std::uint64_t path);
  /// Standard normal for the given step and channel (Box-Muller).
  double normal(std::uint64_t step, std::uint32_t channel) const;

 private:
  PhiloxKey key_;
  std::uint32_t path_lo_, path_hi_;
};

/// Sequential engine usable with <random>-style consumers.
class PhiloxEngine {
 public:
  using result_type = std::uint32_t;
  PhiloxEngine(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  double uniform();
  /// Standard normal by Box-Muller; platform independent apart from libm.
  double normal();

 private:
  PhiloxKey key_;
  PhiloxCounter counter_{};
  PhiloxCounter buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace grade2
