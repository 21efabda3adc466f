#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ef {

__extension__ using uint128 = unsigned __int128;
__extension__ using int128 = __int128;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent 64-bit seed for sub-stream `stream` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the k-th output is a pure function of (key, k).
/// Used for permutation testing so that iteration i can be regenerated
/// independently of any other iteration.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(mix64(key)), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Unbiased integer in [0, bound) by Lemire's multiply-and-reject.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint128 m =
          static_cast<uint128>((*this)()) * static_cast<uint128>(bound);
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

// Distribution transforms written out explicitly: the standard library's
// distributions are implementation-defined, and traces must be bit-identical
// across toolchains.

/// Uniform double in [0, 1) with 53 random bits.
template <typename Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Exponential variate with the given rate (> 0).
template <typename Engine>
double exponential(Engine& engine, double rate) {
  return -std::log1p(-uniform01(engine)) / rate;
}

/// Standard normal variates via Box-Muller, one cached value per pair.
class NormalSource {
 public:
  template <typename Engine>
  double operator()(Engine& engine) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(engine);
    while (u1 == 0.0) u1 = uniform01(engine);
    const double u2 = uniform01(engine);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ef
