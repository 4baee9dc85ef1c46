#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vitdd {

/// Deterministic random source. The engine is std::mt19937_64 (a fixed,
/// portable algorithm); all value transforms are implemented here instead of
/// through std distributions, whose output is implementation-defined. Equal
/// seeds therefore produce equal streams on every platform and toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derives an independent stream from (seed, tag, index). Used to key
  /// randomness to stable identities (sample id, epoch) rather than to
  /// scheduling order.
  static Rng derive(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit();

  /// Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return next_unit() < p; }

  /// Standard normal via Box-Muller on the unit stream.
  double normal();

  /// Normal(0, sigma) resampled until |x| <= bound.
  double truncated_normal(double sigma, double bound);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used for seed derivation and content hashing.
std::uint64_t hash_mix(std::uint64_t x);

}  // namespace vitdd
