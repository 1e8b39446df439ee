#include "grade2/rng.hpp"

#include <cmath>
#include <numbers>

namespace grade2 {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

std::pair<double, double> box_muller(double u1, double u2) {
  // u1 in (0, 1] keeps the logarithm finite.
  const double rad = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return double(bits) * 0x1.0p-53;
}

WienerStream::WienerStream(std::uint64_t seed, std::uint64_t path)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      path_lo_(std::uint32_t(path)),
      path_hi_(std::uint32_t(path >> 32)) {}

double WienerStream::normal(std::uint64_t step, std::uint32_t channel) const {
  // Word 1 mixes the channel pair with the upper step bits; paths get words 2-3.
  const std::uint32_t pair = channel / 2;
  const PhiloxCounter out =
      philox4x32({std::uint32_t(step), pair ^ (std::uint32_t(step >> 32) << 16), path_lo_, path_hi_}, key_);
  const auto [z0, z1] = box_muller(to_unit(out[0], out[1]), to_unit(out[2], out[3]));
  return channel % 2 == 0 ? z0 : z1;
}

PhiloxEngine::PhiloxEngine(std::uint64_t seed, std::uint64_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)} {
  counter_[2] = std::uint32_t(stream);
  counter_[3] = std::uint32_t(stream >> 32);
}

PhiloxEngine::result_type PhiloxEngine::operator()() {
  if (used_ == 4) {
    buffer_ = philox4x32(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    used_ = 0;
  }
  return buffer_[used_++];
}

double PhiloxEngine::uniform() {
  const std::uint32_t hi = (*this)();
  const std::uint32_t lo = (*this)();
  return to_unit(hi, lo);
}

double PhiloxEngine::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const auto [z0, z1] = box_muller(u1, u2);
  spare_ = z1;
  has_spare_ = true;
  return z0;
}

}  // namespace grade2
