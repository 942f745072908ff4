// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mae4d/numcore/array.hpp"
#include "mae4d/simplemae/video.hpp"
#include "mae4d/synthworld/scene.hpp"

namespace mae4d::synthworld {

using numcore::Array;

enum class Surface : int { kNone = 0, kPlane, kBlock, kSprite };

struct Hit {
  /// Camera-space z of the hit (the depth-map value).
  double depth = std::numeric_limits<double>::infinity();
  Surface surface = Surface::kNone;
  int index = -1;
  Vec3 point{0, 0, 0};
  Vec3 color{0, 0, 0};
};

/// Nearest surface along the ray through continuous pixel position (u, v)
/// of `frame`.
Hit cast_ray(const SceneSpec& scene, std::size_t frame, double u, double v);

/// Same, for an arbitrary camera pose and intrinsics.
Hit cast_ray(const SceneSpec& scene, std::size_t frame, const SE3Pose& camera, const Intrinsics& k, double u,
             double v);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

Projection project(const SE3Pose& camera, const Intrinsics& k, const Vec3& world);

/// A tracked surface point: world coordinates for static geometry, offsets
/// from the sprite centre for sprites.
struct TrackAnchor {
  int sprite = -1;
  Vec3 point{0, 0, 0};
};

Vec3 anchor_world(const SceneSpec& scene, const TrackAnchor& anchor, std::size_t frame);

/// Ray-cast rendering, one ray through each pixel centre.
struct FrameBuffers {
  Array rgb;                // [T, H, W, 3]
  Array depth;              // [T, H, W]
  std::vector<int> sprite;  // T*H*W sprite index per pixel, -1 elsewhere
};

FrameBuffers render_frames(const SceneSpec& scene);
FrameBuffers render_frames(const SceneSpec& scene, const Intrinsics& k, std::size_t height, std::size_t width);

/// Tolerance of the depth test deciding track visibility.
inline constexpr double kVisibilityTolerance = 1e-6;

/// Visible when in front of the camera, inside the image, and not farther
/// than the first surface along its own ray by more than the tolerance.
bool point_visible(const SceneSpec& scene, std::size_t frame, const SE3Pose& camera, const Intrinsics& k,
                   std::size_t height, std::size_t width, const Vec3& world);

struct SceneLabels {
  Array depth;                  // [T, H, W]
  std::vector<SE3Pose> cameras;  // camera-to-world per frame
  SE3Pose relative_pose;        // last camera in the first camera's frame
  /// [N, T, 2] (x, y) normalised by width and height; may leave [0, 1]
  /// where the point is out of view.
  Array track_xy;
  Array track_visible;          // [N, T]
  /// [M, T, 4] (xmin, xmax, ymin, ymax) normalised, tight around the
  /// sprite's visible pixels.
  Array boxes;
  Array box_valid;              // [M, T]
  std::vector<int> box_sprites;  // sprite index of each box track
  int class_id = 0;
};

struct Sample {
  simplemae::VideoClip clip;
  SceneLabels labels;
  std::uint64_t seed = 0;
};

/// Query points drawn uniformly over frame 0, anchored to the surface seen
/// through them.
std::vector<TrackAnchor> sample_track_anchors(const SceneSpec& scene, std::size_t count);

/// Fills track_xy / track_visible by projecting anchors through `k` into a
/// height x width image.
void track_labels(const SceneSpec& scene, const std::vector<TrackAnchor>& anchors, const Intrinsics& k,
                  std::size_t height, std::size_t width, SceneLabels& labels);

/// Renders the clip and derives every label from the same geometry.
/// Track query points are drawn uniformly over frame 0.
Sample render_sample(const SceneSpec& scene, const GenConfig& cfg);

/// Sample `index` of the stream `seed`; its RNG stream derives from both.
Sample generate_one(std::uint64_t seed, std::size_t index, const GenConfig& cfg);
std::vector<Sample> generate(std::uint64_t seed, std::size_t count, const GenConfig& cfg, std::size_t first_index = 0);

/// Box tracks from a sprite-index buffer. Sprites whose frame-0 box covers
/// less than `min_fraction` of the frame are dropped.
void box_tracks(const std::vector<int>& sprite_buffer, std::size_t frames, std::size_t height, std::size_t width,
                std::size_t sprite_count, double min_fraction, SceneLabels& labels);

}  // namespace mae4d::synthworld
