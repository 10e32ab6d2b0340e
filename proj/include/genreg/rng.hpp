#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace genreg {

// Counter-based generator: the n-th draw of a stream is
//   splitmix64_mix(key + n * 0x9E3779B97F4A7C15),  n = 1, 2, ...
// where key = splitmix64_mix(seed ^ splitmix64_mix(stream + 0x632BE59BD9B4E019)).
// Uniforms take the top 53 bits; normals use one Box-Muller pair per draw
// (cosine branch only) so every language can reproduce the stream exactly.
class CounterRng {
 public:
  static constexpr std::string_view kName = "splitmix64-ctr";

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n > 0. Multiply-shift, bias < 2^-32 for n < 2^32.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace genreg
