// SPDX-License-Identifier: Apache-2.0
#include "mae4d/numcore/random.hpp"

#include <cmath>
#include <numeric>

namespace mae4d::numcore {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  // 53 random mantissa bits, independent of the library's distribution code.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal(double mean, double stddev) {
  // Box-Muller; u1 is kept away from zero.
  const double u1 = uniform(0x1.0p-53, 1.0);
  const double u2 = uniform();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::truncated_normal(double stddev) {
  for (;;) {
    const double z = normal();
    if (std::abs(z) <= 2.0) return z * stddev;
  }
}

std::size_t Rng::index(std::size_t n) {
  const auto v = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return v < n ? v : n - 1;
}

Array Rng::normal_array(Shape shape, double stddev) {
  Array a(std::move(shape));
  for (auto& v : a.data()) v = normal(0.0, stddev);
  return a;
}

Array Rng::uniform_array(Shape shape, double lo, double hi) {
  Array a(std::move(shape));
  for (auto& v : a.data()) v = uniform(lo, hi);
  return a;
}

Array Rng::truncated_normal_array(Shape shape, double stddev) {
  Array a(std::move(shape));
  for (auto& v : a.data()) v = truncated_normal(stddev);
  return a;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[index(i)]);
  return p;
}

}  // namespace mae4d::numcore
