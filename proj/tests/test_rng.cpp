#include <doctest.h>

#include "grade2/rng.hpp"

#include <cmath>

using namespace grade2;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Published reference vectors of the Random123 distribution.
  CHECK(philox4x32({0u, 0u, 0u, 0u}, {0u, 0u}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("Wiener stream is addressable and reproducible") {
  const WienerStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (std::uint64_t step = 0; step < 50; ++step) {
    for (std::uint32_t ch = 0; ch < 5; ++ch) {
      CHECK(a.normal(step, ch) == b.normal(step, ch));
      CHECK(a.normal(step, ch) != c.normal(step, ch));
      CHECK(a.normal(step, ch) != d.normal(step, ch));
    }
  }
}

TEST_CASE("normal moments") {
  const WienerStream w(7, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = w.normal(std::uint64_t(i / 3), std::uint32_t(i % 3));
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));

  PhiloxEngine e(9);
  double m = 0, v = 0;
  for (int i = 0; i < n; ++i) {
    const double z = e.normal();
    m += z;
    v += z * z;
  }
  CHECK(std::abs(m / n) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(v / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("engine streams differ") {
  PhiloxEngine a(1, 0), b(1, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a() == b();
  CHECK(same < 3);
}
