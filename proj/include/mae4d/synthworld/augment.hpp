// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "mae4d/numcore/random.hpp"
#include "mae4d/synthworld/render.hpp"

namespace mae4d::synthworld {

/// Spatio-temporal crop in source pixels, resized to the output size, then
/// an optional horizontal flip.
struct CropWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::size_t t0 = 0;
  bool flip = false;
};

/// Whole-frame window starting at frame 0.
CropWindow identity_window(std::size_t height, std::size_t width);

/// Intrinsics of the camera that renders the crop window directly at the
/// output size.
Intrinsics cropped_intrinsics(const Intrinsics& k, const CropWindow& w, std::size_t out_height, std::size_t out_width);

/// Applies `w` to clip and labels. Pixels are resampled bilinearly, depth by
/// nearest neighbour. Tracks and boxes are mapped into the window; track
/// points outside it are marked occluded and boxes are clipped to it (box
/// frames left empty become invalid). The class follows the flip.
Sample apply_window(const Sample& in, const CropWindow& w, std::size_t out_frames, std::size_t out_height,
                    std::size_t out_width);

Sample flip_horizontal(const Sample& in);

/// Pixels only: `w` applied to a [T, H, W, 3] clip, flip included.
Array crop_frames(const Array& frames, const CropWindow& w, std::size_t out_frames, std::size_t out_height,
                  std::size_t out_width);

/// Random crop covering `area` of the frame (uniform in [area_lo, area_hi])
/// with aspect ratio log-uniform in [aspect_lo, aspect_hi], a random start
/// frame, and a flip with probability 1/2.
CropWindow random_window(numcore::Rng& rng, std::size_t src_frames, std::size_t src_height, std::size_t src_width,
                         std::size_t out_frames, double area_lo = 0.3, double area_hi = 1.0, double aspect_lo = 0.5,
                         double aspect_hi = 2.0);

/// Pretraining crop: the clip is treated as resized by `resize` (>= 1), and
/// an output-sized window is cropped from it at a random position, with a
/// random start frame and a flip with probability 1/2.
CropWindow pretrain_window(numcore::Rng& rng, std::size_t src_frames, std::size_t src_height, std::size_t src_width,
                           std::size_t out_frames, double resize = 1.15);

}  // namespace mae4d::synthworld
