// SPDX-License-Identifier: Apache-2.0
#include "mae4d/readout/fourier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mae4d::readout {

Array fourier_features(const Array& coords, std::size_t bases) {
  if (coords.rank() != 2) throw numcore::ShapeError("fourier_features: expected [N, D], got " + numcore::to_string(coords.shape()));
  const std::size_t n = coords.dim(0);
  const std::size_t dims = coords.dim(1);
  Array out({n, dims * 2 * bases});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double x = coords.at({i, d});
      if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("fourier_features: coordinate " + std::to_string(x) + " outside [0, 1]");
      }
      double freq = std::numbers::pi;
      for (std::size_t k = 0; k < bases; ++k, freq *= 2.0) {
        out.at({i, d * 2 * bases + k}) = std::sin(freq * x);
        out.at({i, d * 2 * bases + bases + k}) = std::cos(freq * x);
      }
    }
  }
  return out;
}

}  // namespace mae4d::readout
