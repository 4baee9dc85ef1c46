#include "vitdd/rng.hpp"

#include <cmath>

#include "vitdd/errors.hpp"

namespace vitdd {

std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = hash_mix(seed);
  for (char c : tag) {
    h = hash_mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  }
  h = hash_mix(h ^ index);
  return Rng(h);
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ContractError("Rng::below: bound must be nonzero");
  return next_u64() % bound;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double Rng::truncated_normal(double sigma, double bound) {
  for (;;) {
    double x = normal() * sigma;
    if (std::fabs(x) <= bound) return x;
  }
}

}  // namespace vitdd
