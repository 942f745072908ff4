// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mae4d/numcore/array.hpp"

namespace mae4d::readout {

using numcore::Array;

inline constexpr std::size_t kFourierBases = 16;

/// Fourier encoding of coordinates [N, D] in [0, 1]: for each dimension d,
/// sin(2^k pi x_d) for k = 0..bases-1, then the matching cosines. Result is
/// [N, D * 2 * bases]. Throws std::invalid_argument for coordinates outside
/// [0, 1].
Array fourier_features(const Array& coords, std::size_t bases = kFourierBases);

}  // namespace mae4d::readout
