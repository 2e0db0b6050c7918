#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace deflectlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one logical random stream: (master seed, channel, index).
/// Streams are derived counter-style, so any batch can be regenerated
/// independently of execution order or thread count.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t channel = 0;
  std::uint64_t index = 0;

  std::string str() const {
    return std::to_string(master) + ":" + std::to_string(channel) + ":" +
           std::to_string(index);
  }
};

/// xoshiro256++ engine seeded from a StreamKey via splitmix64.
/// Satisfies UniformRandomBitGenerator, so std::* distributions apply.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(const StreamKey& key) {
    std::uint64_t seed = key.master;
    seed ^= splitmix_hash(key.channel + 0x632be59bd9b4e019ULL);
    seed ^= splitmix_hash(key.index + 0x9e6c63d0876a9a47ULL);
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix_hash(std::uint64_t v) {
    std::uint64_t s = v;
    return splitmix64(s);
  }

  std::uint64_t state_[4] = {};
};

/// One independent random stream plus the distributions used everywhere.
class RngStream {
 public:
  explicit RngStream(const StreamKey& key) : key_(key), engine_(key) {}
  RngStream(std::uint64_t master, std::uint64_t channel, std::uint64_t index)
      : RngStream(StreamKey{master, channel, index}) {}

  const StreamKey& key() const { return key_; }
  Xoshiro256& engine() { return engine_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  /// Binomial sample with a Gaussian fallback once n p (1-p) is so large
  /// that the discrete correction is far below Monte Carlo resolution.
  /// Photon budgets reach ~1e10 per sample, where exact sampling is
  /// pointless and the approximation error is < 1e-3 relative on tails.
  std::int64_t binomial(std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n < 0");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const double var = static_cast<double>(n) * p * (1.0 - p);
    if (var >= 1e6) {
      const double mean = static_cast<double>(n) * p;
      double draw = std::round(normal(mean, std::sqrt(var)));
      if (draw < 0.0) draw = 0.0;
      const double nd = static_cast<double>(n);
      if (draw > nd) draw = nd;
      return static_cast<std::int64_t>(draw);
    }
    return std::binomial_distribution<std::int64_t>(n, p)(engine_);
  }

 private:
  StreamKey key_;
  Xoshiro256 engine_;
};

/// Stable channel ids for derived streams (part of the reproducibility
/// contract: changing them changes every seeded result).
namespace stream_channel {
inline constexpr std::uint64_t kWvDark = 1;
inline constexpr std::uint64_t kWvBright = 2;
inline constexpr std::uint64_t kSt = 3;
inline constexpr std::uint64_t kLaserJitter = 4;
inline constexpr std::uint64_t kBatch = 5;
inline constexpr std::uint64_t kTrial = 6;
inline constexpr std::uint64_t kNoiseOnly = 7;
}  // namespace stream_channel

}  // namespace deflectlab
