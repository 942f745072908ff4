// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mae4d/readout/procrustes.hpp"

namespace mae4d::synthworld {

using readout::Mat3;
using readout::SE3Pose;
using readout::Vec3;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 mat_vec(const Mat3& m, const Vec3& v);
Vec3 mat_t_vec(const Mat3& m, const Vec3& v);
/// Rotation about the camera's vertical (y) axis; positive turns toward +x.
Mat3 yaw_rotation(double angle);
Mat3 pitch_rotation(double angle);
Mat3 mat_mul(const Mat3& a, const Mat3& b);

/// Camera motion patterns used as class labels. Cameras look along +z with
/// x to the right and y down.
enum class Motion : int {
  kStatic = 0,
  kPanLeft,
  kPanRight,
  kDollyIn,
  kDollyOut,
  kObjectsLeft,
  kObjectsRight,
  kRise,
};
inline constexpr int kNumClasses = 8;

const char* motion_name(int class_id);
/// Class seen in the horizontally mirrored clip.
int mirrored_class(int class_id);
/// Class of clip `index` in a stream: every block of 8 consecutive clips is a
/// seeded permutation of all classes.
int balanced_class(std::uint64_t seed, std::size_t index);

/// Pinhole camera; pixel (i, j) covers [i, i+1) x [j, j+1).
struct Intrinsics {
  double fx = 16.0;
  double fy = 16.0;
  double cx = 16.0;
  double cy = 16.0;

  /// Focal length 0.5 * width, principal point at the image centre.
  static Intrinsics for_resolution(std::size_t height, std::size_t width);
};

/// Two-colour value noise in surface coordinates.
struct Texture {
  Vec3 base{0.5, 0.5, 0.5};
  Vec3 accent{0.2, 0.2, 0.2};
  double frequency = 1.0;
  std::uint64_t seed = 0;

  Vec3 sample(double u, double v) const;
};

/// Infinite plane {x : dot(normal, x) = offset}; texture coordinates are the
/// projections of x on u_axis and v_axis.
struct Plane {
  Vec3 normal;
  double offset = 0.0;
  Vec3 u_axis;
  Vec3 v_axis;
  Texture texture;
};

/// Box resting in the room, rotated by `yaw` about the vertical axis.
struct Block {
  Vec3 center;
  Vec3 half;
  double yaw = 0.0;
  Texture texture;
};

/// Flat rectangle parallel to the world x-y plane moving along a quadratic
/// Bezier curve over the clip.
struct Sprite {
  Vec3 start;
  Vec3 middle;
  Vec3 end;
  double half_w = 0.3;
  double half_h = 0.3;
  Texture texture;

  /// Centre at normalised clip time s in [0, 1].
  Vec3 center(double s) const;
};

struct GenConfig {
  std::size_t frames = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t tracks = 16;
  std::size_t min_sprites = 1;
  std::size_t max_sprites = 3;
  std::size_t min_blocks = 1;
  std::size_t max_blocks = 3;
  /// Sprites whose first-frame box covers less of the frame are not tracked.
  double min_box_fraction = 0.005;
  std::size_t max_retries = 100;

  void validate() const;
  bool operator==(const GenConfig&) const = default;
};

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

struct SceneSpec {
  std::uint64_t seed = 0;
  int class_id = 0;
  std::size_t frames = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  Intrinsics intrinsics;
  /// Camera-to-world pose per frame.
  std::vector<SE3Pose> cameras;
  std::vector<Plane> planes;
  std::vector<Block> blocks;
  std::vector<Sprite> sprites;
  /// Rejected samples before this one was accepted.
  std::size_t retries = 0;

  double time(std::size_t frame) const;
};

/// Cameras stay inside the room and clear of blocks, and every sprite stays
/// in front of every camera.
bool is_feasible(const SceneSpec& scene);

/// Samples a feasible scene, resampling up to cfg.max_retries times.
/// Throws std::runtime_error when no feasible scene is found.
SceneSpec sample_scene(std::uint64_t seed, int class_id, const GenConfig& cfg);

/// Pose of the last camera expressed in the first camera's frame.
SE3Pose relative_pose(const SE3Pose& first, const SE3Pose& last);

}  // namespace mae4d::synthworld
