#pragma once

#include <cstdint>
#include <random>

namespace syncrds {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the independent stream `stream` derived from a master seed.
/// Pure function of its arguments, so Monte Carlo path i always sees the
/// same numbers regardless of which thread runs it.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace syncrds
