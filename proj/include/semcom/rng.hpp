#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace semcom {

// Seeded random stream. fork() derives statistically independent child
// streams deterministically, so parallel runs stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(eng_);
  }
  std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }

  // Circularly-symmetric complex Gaussian with the given total variance.
  std::complex<double> cnormal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    return {normal(0.0, s), normal(0.0, s)};
  }

  Rng fork(std::uint64_t salt) const { return Rng(splitmix(seed_ ^ (salt * 0x9e3779b97f4a7c15ULL))); }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace semcom
