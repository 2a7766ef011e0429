#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace lerw {

// SplitMix64 finalizer (Steele/Lea/Vigna 2014, also Vigna's splitmix64.c).
// Constants: 0xbf58476d1ce4e5b9, 0x94d049bb133111eb, shifts 30/27/31.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Seed of the independent stream used for replicate index `replicate`.
// Published mixing function: mix64(base + (replicate+1) * golden gamma).
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t replicate) {
  return mix64(base_seed + (replicate + 1) * kGoldenGamma);
}

// Counter-based splittable generator: state advances by a fixed gamma,
// output is the finalizer of the state. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() { return mix64(state_ += kGoldenGamma); }

 private:
  std::uint64_t state_;
};

// Uniform double in [0, 1), 53-bit resolution.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log argument.
template <class Rng>
double uniform01_positive(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Standard exponential via inversion.
template <class Rng>
double exponential(Rng& rng) {
  return -std::log(uniform01_positive(rng));
}

// Unbiased uniform integer in [0, bound) by rejection.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below needs bound >= 1");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

}  // namespace lerw
