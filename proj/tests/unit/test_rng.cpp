#include <cmath>
#include <vector>

#include "doctest.h"
#include "lorenzlab/rng.hpp"

using namespace lorenzlab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(a == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are determined by (seed, stream_id)") {
  NoiseStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    double va = a.normal(), vb = b.normal(), vc = c.normal(), vd = d.normal();
    CHECK(va == vb);
    same_c += va == vc;
    same_d += va == vd;
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  CHECK(a.counter() > 0);
  CHECK(a.counter() == b.counter());
}

TEST_CASE("normal moments and cross-stream correlation") {
  const int n = 400000;
  NoiseStream a(7, 0), b(7, 1);
  double s1 = 0, s2 = 0, s4 = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    double x = a.normal(), y = b.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    sab += x * y;
  }
  CHECK(std::fabs(s1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(s2 / n - 1) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(s4 / n - 3) < 5.0 * std::sqrt(96.0 / n));
  CHECK(std::fabs(sab / n) < 5.0 / std::sqrt(n));
}

TEST_CASE("uniforms lie strictly inside (0,1)") {
  NoiseStream s(0, 0);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0);
  CHECK(hi < 1);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
