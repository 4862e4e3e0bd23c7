#pragma once

#include <cstdint>
#include <random>

namespace pttr {

/// Seeded random stream. Child streams derived with fork() are independent of
/// how many draws the parent has made, which keeps per-sequence randomness
/// stable regardless of evaluation order.
class RandomState {
 public:
  explicit RandomState(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  RandomState fork(std::uint64_t stream) const { return RandomState(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL))); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
  int uniform_int(int lo, int hi_inclusive) {
    return std::uniform_int_distribution<int>(lo, hi_inclusive)(engine_);
  }
  int poisson(double mean) { return std::poisson_distribution<int>(mean)(engine_); }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace pttr
