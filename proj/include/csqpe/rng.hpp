#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csqpe {

// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable generator with counter-based stream splitting. A child stream is a
// pure function of (parent seed, keys), so work items can be evaluated in any
// order without changing the numbers they see.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }

  // Stream keyed by `keys`, independent of how much this generator has been
  // consumed.
  Rng split(std::initializer_list<std::uint64_t> keys) const {
    std::uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc909ULL);
    for (auto k : keys) h = mix64(h ^ mix64(k));
    return Rng(h);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Seed for a child stream drawn from this generator's sequence.
  std::uint64_t next_seed() { return mix64(engine_()); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace csqpe
