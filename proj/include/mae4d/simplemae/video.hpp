// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mae4d/numcore/autodiff.hpp"
#include "mae4d/simplemae/config.hpp"

namespace mae4d::simplemae {

using numcore::Array;
using numcore::Var;

/// T x H x W x 3 pixels in [0, 1].
struct VideoClip {
  Array frames;
  std::size_t frame_stride = 1;

  std::size_t frames_count() const { return frames.dim(0); }
  std::size_t height() const { return frames.dim(1); }
  std::size_t width() const { return frames.dim(2); }
  Extent3 extent() const { return {frames.dim(0), frames.dim(1), frames.dim(2)}; }
};

/// Backbone activations laid out as T x K x C (time, spatial tokens, channels).
struct FeatureMap {
  Array data;
  int layer_percent = 100;

  std::size_t frames() const { return data.dim(0); }
  std::size_t tokens() const { return data.dim(1); }
  std::size_t channels() const { return data.dim(2); }
};

/// Checks that `extent` is a whole number of `patch` blocks.
void check_divisible(const Extent3& extent, const Extent3& patch, const char* what);

/// Splits a [T, H, W, 3] clip into [N, t*h*w*3] tokens ordered by (time,
/// row, column) of the patch grid; values inside a token are ordered
/// (dt, dy, dx, channel).
Array patchify(const Array& frames, const Extent3& patch);
Var patchify(const Var& frames, const Extent3& patch);

/// Inverse of patchify for a token grid `grid` of `patch`-sized blocks.
Array unpatchify(const Array& tokens, const Extent3& grid, const Extent3& patch);
Var unpatchify(const Var& tokens, const Extent3& grid, const Extent3& patch);

}  // namespace mae4d::simplemae
