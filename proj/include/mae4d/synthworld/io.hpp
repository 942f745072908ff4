// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "mae4d/synthworld/render.hpp"

namespace mae4d::synthworld {

/// One clip and its labels per file, in the tensor container format
/// (meta kind "clip").
void save_sample(const std::filesystem::path& path, const Sample& s);
Sample load_sample(const std::filesystem::path& path);

/// Binary 8-bit PPM (P6). Values in [0, 1] are scaled by 255, rounded and
/// clamped. rgb: [H, W, 3].
void write_ppm(const std::filesystem::path& path, const Array& rgb);
/// Returns [H, W, 3] in [0, 1].
Array read_ppm(const std::filesystem::path& path);

/// Depth map [H, W] as grey levels, 0 at depth 0 and 255 at `max_depth`.
void write_depth_ppm(const std::filesystem::path& path, const Array& depth, double max_depth = 10.0);

/// Frame `t` of a [T, H, W, 3] clip.
Array frame_of(const Array& frames, std::size_t t);

}  // namespace mae4d::synthworld
