// SPDX-License-Identifier: Apache-2.0
#include "mae4d/synthworld/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mae4d/numcore/random.hpp"

namespace mae4d::synthworld {

using numcore::Rng;

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

Vec3 mat_t_vec(const Mat3& m, const Vec3& v) {
  Vec3 out{0, 0, 0};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[c] += m[r][c] * v[r];
  return out;
}

Mat3 yaw_rotation(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Mat3 pitch_rotation(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return Mat3{{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

const char* motion_name(int class_id) {
  static const char* const names[kNumClasses] = {"static",       "pan-left",      "pan-right", "dolly-in",
                                                  "dolly-out",    "objects-left",  "objects-right", "rise"};
  if (class_id < 0 || class_id >= kNumClasses) throw std::out_of_range("motion class " + std::to_string(class_id));
  return names[class_id];
}

int mirrored_class(int class_id) {
  switch (static_cast<Motion>(class_id)) {
    case Motion::kPanLeft: return static_cast<int>(Motion::kPanRight);
    case Motion::kPanRight: return static_cast<int>(Motion::kPanLeft);
    case Motion::kObjectsLeft: return static_cast<int>(Motion::kObjectsRight);
    case Motion::kObjectsRight: return static_cast<int>(Motion::kObjectsLeft);
    default: return class_id;
  }
}

int balanced_class(std::uint64_t seed, std::size_t index) {
  Rng rng(numcore::mix_seed(seed ^ 0x5c1a55ULL, index / kNumClasses));
  return static_cast<int>(rng.permutation(kNumClasses)[index % kNumClasses]);
}

Intrinsics Intrinsics::for_resolution(std::size_t height, std::size_t width) {
  const double f = 0.5 * static_cast<double>(width);
  return {f, f, 0.5 * static_cast<double>(width), 0.5 * static_cast<double>(height)};
}

namespace {

double lattice(std::uint64_t seed, long i, long j) {
  const std::uint64_t h = numcore::mix_seed(seed, (static_cast<std::uint64_t>(i) << 32) ^ static_cast<std::uint32_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const long i = static_cast<long>(fu), j = static_cast<long>(fv);
  double a = u - fu, b = v - fv;
  a = a * a * (3 - 2 * a);
  b = b * b * (3 - 2 * b);
  const double top = lattice(seed, i, j) * (1 - a) + lattice(seed, i + 1, j) * a;
  const double bottom = lattice(seed, i, j + 1) * (1 - a) + lattice(seed, i + 1, j + 1) * a;
  return top * (1 - b) + bottom * b;
}

}  // namespace

Vec3 Texture::sample(double u, double v) const {
  const double n = 0.65 * value_noise(seed, u * frequency, v * frequency) +
                   0.35 * value_noise(seed + 1, u * frequency * 2.7, v * frequency * 2.7);
  Vec3 c = base + n * accent;
  for (double& x : c) x = std::clamp(x, 0.05, 0.95);
  return c;
}

Vec3 Sprite::center(double s) const {
  const double a = (1 - s) * (1 - s), b = 2 * (1 - s) * s, c = s * s;
  return a * start + b * middle + c * end;
}

void GenConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("GenConfig: " + what); };
  if (frames == 0 || height == 0 || width == 0) fail("frames, height and width must be positive");
  if (min_sprites > max_sprites || min_blocks > max_blocks) fail("min counts exceed max counts");
  if (min_box_fraction < 0 || min_box_fraction >= 1) fail("min_box_fraction must be in [0, 1)");
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = {{"frames", c.frames},           {"height", c.height},
       {"width", c.width},             {"tracks", c.tracks},
       {"min_sprites", c.min_sprites}, {"max_sprites", c.max_sprites},
       {"min_blocks", c.min_blocks},   {"max_blocks", c.max_blocks},
       {"min_box_fraction", c.min_box_fraction}, {"max_retries", c.max_retries}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  const GenConfig d;
  c.frames = j.value("frames", d.frames);
  c.height = j.value("height", d.height);
  c.width = j.value("width", d.width);
  c.tracks = j.value("tracks", d.tracks);
  c.min_sprites = j.value("min_sprites", d.min_sprites);
  c.max_sprites = j.value("max_sprites", d.max_sprites);
  c.min_blocks = j.value("min_blocks", d.min_blocks);
  c.max_blocks = j.value("max_blocks", d.max_blocks);
  c.min_box_fraction = j.value("min_box_fraction", d.min_box_fraction);
  c.max_retries = j.value("max_retries", d.max_retries);
}

double SceneSpec::time(std::size_t frame) const {
  return frames > 1 ? static_cast<double>(frame) / static_cast<double>(frames - 1) : 0.0;
}

namespace {

constexpr double kCameraClearance = 0.3;
constexpr double kSpriteMinDepth = 0.6;

Texture random_texture(Rng& rng) {
  Texture t;
  for (int c = 0; c < 3; ++c) {
    t.base[c] = rng.uniform(0.1, 0.6);
    t.accent[c] = rng.uniform(-0.3, 0.4);
  }
  t.frequency = rng.uniform(1.0, 2.5);
  t.seed = rng.engine()();
  return t;
}

Plane make_plane(const Vec3& normal, double offset, const Vec3& u, const Vec3& v, Rng& rng) {
  return {normal, offset, u, v, random_texture(rng)};
}

/// Room extents: x in [-wall, wall], y in [-ceiling, floor], z in [back_min, back].
struct Room {
  double wall, floor, ceiling, back, front;
};

SceneSpec sample_once(std::uint64_t seed, int class_id, const GenConfig& cfg, std::size_t attempt) {
  Rng rng(numcore::mix_seed(seed, attempt));
  SceneSpec s;
  s.seed = seed;
  s.class_id = class_id;
  s.frames = cfg.frames;
  s.height = cfg.height;
  s.width = cfg.width;
  s.intrinsics = Intrinsics::for_resolution(cfg.height, cfg.width);
  s.retries = attempt;

  const Room room{rng.uniform(2.5, 4.0), rng.uniform(1.0, 1.6), rng.uniform(1.5, 2.5), rng.uniform(5.0, 7.5), -3.0};
  const Vec3 ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
  s.planes.push_back(make_plane(ey, room.floor, ex, ez, rng));                  // floor
  s.planes.push_back(make_plane((-1.0) * ey, room.ceiling, ex, ez, rng));       // ceiling
  s.planes.push_back(make_plane(ez, room.back, ex, ey, rng));                   // back wall
  s.planes.push_back(make_plane((-1.0) * ez, -room.front, ex, ey, rng));        // wall behind the camera
  s.planes.push_back(make_plane(ex, room.wall, ez, ey, rng));                   // right wall
  s.planes.push_back(make_plane((-1.0) * ex, room.wall, ez, ey, rng));          // left wall

  const std::size_t n_blocks = cfg.min_blocks + rng.index(cfg.max_blocks - cfg.min_blocks + 1);
  for (std::size_t i = 0; i < n_blocks; ++i) {
    Block b;
    b.half = {rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8)};
    b.center = {rng.uniform(-room.wall + b.half[0], room.wall - b.half[0]), room.floor - b.half[1],
                rng.uniform(1.5, room.back - b.half[2])};
    b.yaw = rng.uniform(-0.6, 0.6);
    b.texture = random_texture(rng);
    s.blocks.push_back(b);
  }

  const auto motion = static_cast<Motion>(class_id);
  const std::size_t n_sprites = cfg.min_sprites + rng.index(cfg.max_sprites - cfg.min_sprites + 1);
  for (std::size_t i = 0; i < n_sprites; ++i) {
    Sprite sp;
    sp.half_w = rng.uniform(0.25, 0.5);
    sp.half_h = rng.uniform(0.25, 0.5);
    const double z = rng.uniform(1.8, 3.5);
    Vec3 delta;
    if (motion == Motion::kObjectsLeft || motion == Motion::kObjectsRight) {
      const double dx = rng.uniform(1.0, 2.0) * (motion == Motion::kObjectsLeft ? -1.0 : 1.0);
      delta = {dx, rng.uniform(-0.2, 0.2), 0.0};
    } else {
      delta = {rng.uniform(-0.15, 0.15), rng.uniform(-0.5, 0.5), 0.0};
    }
    const Vec3 mid{rng.uniform(-0.8, 0.8) * z * 0.5, rng.uniform(-0.4, 0.4) * z * 0.5, z};
    sp.start = mid - 0.5 * delta;
    sp.end = mid + 0.5 * delta;
    sp.middle = mid + Vec3{0.0, rng.uniform(-0.2, 0.2), 0.0};
    sp.texture = random_texture(rng);
    sp.texture.frequency *= 3.0;
    for (double& c : sp.texture.base) c = std::min(c + 0.25, 0.9);
    s.sprites.push_back(sp);
  }

  // Starting pose, then class-specific motion.
  SE3Pose start;
  start.R = mat_mul(yaw_rotation(rng.uniform(-0.3, 0.3)), pitch_rotation(rng.uniform(-0.1, 0.1)));
  start.t = {rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.3)};
  const double angle = rng.uniform(0.17, 0.45);
  const double distance = rng.uniform(0.5, 1.2);
  const double height = rng.uniform(0.3, 0.6);
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    const double tau = s.time(f);
    SE3Pose local;
    switch (motion) {
      case Motion::kPanLeft: local.R = yaw_rotation(-angle * tau); break;
      case Motion::kPanRight: local.R = yaw_rotation(angle * tau); break;
      case Motion::kDollyIn: local.t = {0, 0, distance * tau}; break;
      case Motion::kDollyOut: local.t = {0, 0, -distance * tau}; break;
      case Motion::kRise: local.t = {0, -height * tau, 0}; break;
      default: break;
    }
    s.cameras.push_back(compose(start, local));
  }
  return s;
}

bool inside_block(const Block& b, const Vec3& p, double margin) {
  const Vec3 d = mat_t_vec(yaw_rotation(b.yaw), p - b.center);
  for (int k = 0; k < 3; ++k)
    if (std::abs(d[k]) > b.half[k] + margin) return false;
  return true;
}

}  // namespace

bool is_feasible(const SceneSpec& scene) {
  for (const auto& cam : scene.cameras) {
    for (const auto& pl : scene.planes) {
      if (pl.offset - dot(pl.normal, cam.t) < kCameraClearance) return false;
    }
    for (const auto& b : scene.blocks) {
      if (inside_block(b, cam.t, kCameraClearance)) return false;
    }
  }
  for (std::size_t f = 0; f < scene.cameras.size(); ++f) {
    const auto& cam = scene.cameras[f];
    for (const auto& sp : scene.sprites) {
      const Vec3 c = sp.center(scene.time(f));
      for (double dx : {-sp.half_w, sp.half_w}) {
        for (double dy : {-sp.half_h, sp.half_h}) {
          const Vec3 corner = c + Vec3{dx, dy, 0.0};
          if (mat_t_vec(cam.R, corner - cam.t)[2] < kSpriteMinDepth) return false;
        }
      }
    }
  }
  return true;
}

SceneSpec sample_scene(std::uint64_t seed, int class_id, const GenConfig& cfg) {
  cfg.validate();
  motion_name(class_id);
  for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    SceneSpec s = sample_once(seed, class_id, cfg, attempt);
    if (is_feasible(s)) return s;
  }
  throw std::runtime_error("sample_scene: no feasible scene for seed " + std::to_string(seed) + " after " +
                           std::to_string(cfg.max_retries + 1) + " attempts");
}

SE3Pose relative_pose(const SE3Pose& first, const SE3Pose& last) { return compose(inverse(first), last); }

}  // namespace mae4d::synthworld
