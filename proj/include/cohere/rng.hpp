#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

// Counter-based splittable RNG. Every (experiment id, seed, step) triple
// names an independent stream, so a recorded step reproduces bit-for-bit
// no matter how many draws other steps consumed and no matter the thread
// that ran it. The mixer is SplitMix64's finalizer (a bijection on u64),
// driven here in pure counter mode.

namespace cohere {

namespace detail {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}
}  // namespace detail

class CounterRng {
 public:
  // Stream key for step `t` of run (`experiment_id`, `seed`).
  CounterRng(std::string_view experiment_id, std::uint64_t seed, std::uint64_t t)
      : key_(detail::mix64(detail::fnv1a(experiment_id) + detail::kGamma * seed) ^
             detail::mix64(t * detail::kGamma + 0x632BE59BD9B4E019ULL)) {}

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++counter_) * detail::kGamma); }

  // Uniform in [0, 1): 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (avoids std::normal_distribution, whose
  // stream is implementation-defined). One spare value is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform on the solid ball of the given radius in R^dim (direction from a
  // normalized Gaussian, radius from the u^{1/dim} transform).
  std::vector<double> next_in_ball(int dim, double radius) {
    std::vector<double> z(static_cast<std::size_t>(dim));
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& v : z) {
        v = next_normal();
        n2 += v * v;
      }
    } while (n2 == 0.0);
    const double r = radius * std::pow(next_double(), 1.0 / dim) / std::sqrt(n2);
    for (auto& v : z) v *= r;
    return z;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cohere
