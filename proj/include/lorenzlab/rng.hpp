#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <boost/random/normal_distribution.hpp>

namespace lorenzlab {

// Philox4x32-10 (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = M0 * c[0];
    std::uint64_t p1 = M1 * c[2];
    c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
         std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

// Philox as a 64-bit uniform random bit generator. Block `counter` is
// philox(counter_lo, counter_hi, stream_lo, stream_hi; seed) and yields two
// outputs.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  result_type operator()() {
    if (have_) {
      have_ = false;
      return buf_;
    }
    PhiloxCounter ctr{std::uint32_t(counter_), std::uint32_t(counter_ >> 32), std::uint32_t(stream_),
                      std::uint32_t(stream_ >> 32)};
    ++counter_;
    auto b = philox4x32_10(ctr, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
    buf_ = (std::uint64_t(b[2]) << 32) | b[3];
    have_ = true;
    return (std::uint64_t(b[0]) << 32) | b[1];
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_ = 0;
  bool have_ = false;
};

// Gaussian stream keyed by (seed, stream_id); Boost's ziggurat sampler on top
// of Philox.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id) : eng_(seed, stream_id) {}

  double normal() { return normal_(eng_); }

  // Uniform on the open interval (0,1).
  double uniform() { return ((eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0); }

  std::uint64_t seed() const { return eng_.seed(); }
  std::uint64_t stream_id() const { return eng_.stream_id(); }
  // Philox blocks consumed so far.
  std::uint64_t counter() const { return eng_.counter(); }

 private:
  PhiloxEngine eng_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace lorenzlab
