#pragma once

#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace rtpref {

/// xoshiro256++ (Blackman & Vigna), seeded through splitmix64. The stream for
/// a given seed is identical on every platform.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed of the `stream`-th independent substream of `seed`. Used to split
/// Monte Carlo batches into fixed chunks so results do not depend on the
/// number of worker threads.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (ziggurat).
  double normal() { return normal_(engine_); }

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  Xoshiro256pp engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace rtpref
