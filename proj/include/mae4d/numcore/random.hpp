// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mae4d/numcore/array.hpp"

namespace mae4d::numcore {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0);

/// Seeded generator. Identical seeds give identical streams within a build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Normal truncated to +-2 standard deviations by rejection.
  double truncated_normal(double stddev);
  std::size_t index(std::size_t n);
  bool coin(double p = 0.5) { return uniform() < p; }

  Array normal_array(Shape shape, double stddev);
  Array uniform_array(Shape shape, double lo, double hi);
  Array truncated_normal_array(Shape shape, double stddev);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mae4d::numcore
