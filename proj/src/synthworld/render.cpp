// SPDX-License-Identifier: Apache-2.0
#include "mae4d/synthworld/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mae4d/numcore/random.hpp"

namespace mae4d::synthworld {

namespace {

constexpr double kMinHit = 1e-9;
const Vec3 kLight = [] {
  const Vec3 l{0.35, -1.0, 0.45};
  const double n = std::sqrt(dot(l, l));
  return Vec3{l[0] / n, l[1] / n, l[2] / n};
}();

double shade(const Vec3& normal) { return 0.55 + 0.45 * std::abs(dot(normal, kLight)); }

Vec3 shaded(const Vec3& color, const Vec3& normal) {
  const double s = shade(normal);
  Vec3 c = s * color;
  for (double& x : c) x = std::clamp(x, 0.05, 0.95);
  return c;
}

void consider(Hit& best, double depth, Surface surface, int index) {
  if (depth > kMinHit && depth < best.depth) {
    best.depth = depth;
    best.surface = surface;
    best.index = index;
  }
}

}  // namespace

Projection project(const SE3Pose& camera, const Intrinsics& k, const Vec3& world) {
  const Vec3 c = mat_t_vec(camera.R, world - camera.t);
  return {k.fx * c[0] / c[2] + k.cx, k.fy * c[1] / c[2] + k.cy, c[2]};
}

Hit cast_ray(const SceneSpec& scene, std::size_t frame, double u, double v) {
  return cast_ray(scene, frame, scene.cameras.at(frame), scene.intrinsics, u, v);
}

Hit cast_ray(const SceneSpec& scene, std::size_t frame, const SE3Pose& camera, const Intrinsics& k, double u,
             double v) {
  // Direction with unit camera-space z, so the ray parameter is the depth.
  const Vec3 d_cam{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
  const Vec3 d = mat_vec(camera.R, d_cam);
  const Vec3& o = camera.t;
  const double time = scene.time(frame);

  Hit best;
  for (std::size_t i = 0; i < scene.planes.size(); ++i) {
    const auto& p = scene.planes[i];
    const double denom = dot(p.normal, d);
    if (std::abs(denom) < 1e-12) continue;
    consider(best, (p.offset - dot(p.normal, o)) / denom, Surface::kPlane, static_cast<int>(i));
  }
  Vec3 block_normal{0, 0, 0};
  for (std::size_t i = 0; i < scene.blocks.size(); ++i) {
    const auto& b = scene.blocks[i];
    const Mat3 rot = yaw_rotation(b.yaw);
    const Vec3 lo = mat_t_vec(rot, o - b.center);
    const Vec3 ld = mat_t_vec(rot, d);
    double t_near = -INFINITY, t_far = INFINITY;
    int axis = -1;
    double sign = 0.0;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(ld[a]) < 1e-12) {
        miss = std::abs(lo[a]) > b.half[a];
        continue;
      }
      double t0 = (-b.half[a] - lo[a]) / ld[a], t1 = (b.half[a] - lo[a]) / ld[a];
      double s = -1.0;
      if (t0 > t1) {
        std::swap(t0, t1);
        s = 1.0;
      }
      if (t0 > t_near) {
        t_near = t0;
        axis = a;
        sign = s;
      }
      t_far = std::min(t_far, t1);
    }
    if (miss || axis < 0 || t_near > t_far || t_near <= kMinHit) continue;
    if (t_near < best.depth) {
      consider(best, t_near, Surface::kBlock, static_cast<int>(i));
      Vec3 n{0, 0, 0};
      n[axis] = sign;
      block_normal = mat_vec(rot, n);
    }
  }
  for (std::size_t i = 0; i < scene.sprites.size(); ++i) {
    const auto& sp = scene.sprites[i];
    const Vec3 c = sp.center(time);
    if (std::abs(d[2]) < 1e-12) continue;
    const double t = (c[2] - o[2]) / d[2];
    if (t <= kMinHit || t >= best.depth) continue;
    const Vec3 p = o + t * d;
    if (std::abs(p[0] - c[0]) <= sp.half_w && std::abs(p[1] - c[1]) <= sp.half_h) {
      consider(best, t, Surface::kSprite, static_cast<int>(i));
    }
  }

  if (best.surface == Surface::kNone) return best;
  best.point = o + best.depth * d;
  switch (best.surface) {
    case Surface::kPlane: {
      const auto& p = scene.planes[best.index];
      best.color = shaded(p.texture.sample(dot(best.point, p.u_axis), dot(best.point, p.v_axis)), p.normal);
      break;
    }
    case Surface::kBlock: {
      const auto& b = scene.blocks[best.index];
      const Vec3 local = mat_t_vec(yaw_rotation(b.yaw), best.point - b.center);
      // Texture coordinates from the two axes spanning the hit face.
      const Vec3 n_local = mat_t_vec(yaw_rotation(b.yaw), block_normal);
      int skip = 0;
      for (int a = 1; a < 3; ++a)
        if (std::abs(n_local[a]) > std::abs(n_local[skip])) skip = a;
      const double tu = local[skip == 0 ? 1 : 0], tv = local[skip == 2 ? 1 : 2];
      best.color = shaded(b.texture.sample(tu + 7.0 * skip, tv), block_normal);
      break;
    }
    case Surface::kSprite: {
      const auto& sp = scene.sprites[best.index];
      const Vec3 c = sp.center(time);
      best.color = sp.texture.sample(best.point[0] - c[0], best.point[1] - c[1]);
      break;
    }
    case Surface::kNone: break;
  }
  return best;
}

Vec3 anchor_world(const SceneSpec& scene, const TrackAnchor& anchor, std::size_t frame) {
  if (anchor.sprite < 0) return anchor.point;
  return scene.sprites.at(anchor.sprite).center(scene.time(frame)) + anchor.point;
}

FrameBuffers render_frames(const SceneSpec& scene) {
  return render_frames(scene, scene.intrinsics, scene.height, scene.width);
}

FrameBuffers render_frames(const SceneSpec& scene, const Intrinsics& k, std::size_t height, std::size_t width) {
  const std::size_t frames = scene.cameras.size();
  FrameBuffers out{Array({frames, height, width, 3}), Array({frames, height, width}),
                   std::vector<int>(frames * height * width, -1)};
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const Hit h = cast_ray(scene, f, scene.cameras[f], k, x + 0.5, y + 0.5);
        if (h.surface == Surface::kNone) throw std::logic_error("render: ray escaped the room");
        const std::size_t px = (f * height + y) * width + x;
        out.depth[px] = h.depth;
        for (int c = 0; c < 3; ++c) out.rgb[px * 3 + c] = h.color[c];
        if (h.surface == Surface::kSprite) out.sprite[px] = h.index;
      }
    }
  }
  return out;
}

bool point_visible(const SceneSpec& scene, std::size_t frame, const SE3Pose& camera, const Intrinsics& k,
                   std::size_t height, std::size_t width, const Vec3& world) {
  const Projection p = project(camera, k, world);
  if (!(p.depth > 1e-3)) return false;
  if (p.u < 0 || p.v < 0 || p.u >= static_cast<double>(width) || p.v >= static_cast<double>(height)) return false;
  const Hit h = cast_ray(scene, frame, camera, k, p.u, p.v);
  return p.depth <= h.depth + kVisibilityTolerance;
}

void box_tracks(const std::vector<int>& sprite_buffer, std::size_t frames, std::size_t height, std::size_t width,
                std::size_t sprite_count, double min_fraction, SceneLabels& labels) {
  struct Extent {
    std::size_t x0, x1, y0, y1;
    bool any = false;
  };
  std::vector<std::vector<Extent>> ext(sprite_count, std::vector<Extent>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const int s = sprite_buffer[(f * height + y) * width + x];
        if (s < 0) continue;
        Extent& e = ext[s][f];
        if (!e.any) {
          e = {x, x, y, y, true};
        } else {
          e.x0 = std::min(e.x0, x);
          e.x1 = std::max(e.x1, x);
          e.y0 = std::min(e.y0, y);
          e.y1 = std::max(e.y1, y);
        }
      }
    }
  }
  labels.box_sprites.clear();
  for (std::size_t s = 0; s < sprite_count; ++s) {
    const Extent& e0 = ext[s][0];
    if (!e0.any) continue;
    const double area = static_cast<double>((e0.x1 - e0.x0 + 1) * (e0.y1 - e0.y0 + 1)) / (height * width);
    if (area < min_fraction) continue;
    labels.box_sprites.push_back(static_cast<int>(s));
  }
  const std::size_t m = labels.box_sprites.size();
  if (m == 0) {
    labels.boxes = Array();
    labels.box_valid = Array();
    return;
  }
  labels.boxes = Array({m, frames, 4});
  labels.box_valid = Array({m, frames});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t f = 0; f < frames; ++f) {
      const Extent& e = ext[labels.box_sprites[i]][f];
      if (!e.any) continue;
      labels.box_valid.at({i, f}) = 1.0;
      labels.boxes.at({i, f, 0}) = static_cast<double>(e.x0) / width;
      labels.boxes.at({i, f, 1}) = static_cast<double>(e.x1 + 1) / width;
      labels.boxes.at({i, f, 2}) = static_cast<double>(e.y0) / height;
      labels.boxes.at({i, f, 3}) = static_cast<double>(e.y1 + 1) / height;
    }
  }
}

std::vector<TrackAnchor> sample_track_anchors(const SceneSpec& scene, std::size_t count) {
  numcore::Rng rng(numcore::mix_seed(scene.seed, 0x7a11ULL));
  std::vector<TrackAnchor> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform(0.0, static_cast<double>(scene.width));
    const double v = rng.uniform(0.0, static_cast<double>(scene.height));
    const Hit h = cast_ray(scene, 0, u, v);
    TrackAnchor a;
    if (h.surface == Surface::kSprite) {
      a.sprite = h.index;
      a.point = h.point - scene.sprites[h.index].center(scene.time(0));
    } else {
      a.point = h.point;
    }
    out.push_back(a);
  }
  return out;
}

void track_labels(const SceneSpec& scene, const std::vector<TrackAnchor>& anchors, const Intrinsics& k,
                  std::size_t height, std::size_t width, SceneLabels& labels) {
  const std::size_t n = anchors.size(), T = scene.cameras.size();
  if (n == 0) {
    labels.track_xy = Array();
    labels.track_visible = Array();
    return;
  }
  labels.track_xy = Array({n, T, 2});
  labels.track_visible = Array({n, T});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < T; ++f) {
      const Vec3 w = anchor_world(scene, anchors[i], f);
      const Projection p = project(scene.cameras[f], k, w);
      labels.track_xy.at({i, f, 0}) = p.u / width;
      labels.track_xy.at({i, f, 1}) = p.v / height;
      labels.track_visible.at({i, f}) = point_visible(scene, f, scene.cameras[f], k, height, width, w) ? 1.0 : 0.0;
    }
  }
}

Sample render_sample(const SceneSpec& scene, const GenConfig& cfg) {
  const std::size_t T = scene.cameras.size(), H = scene.height, W = scene.width;
  FrameBuffers buf = render_frames(scene);
  Sample out;
  out.seed = scene.seed;
  out.clip.frames = std::move(buf.rgb);
  SceneLabels& L = out.labels;
  L.class_id = scene.class_id;
  L.depth = std::move(buf.depth);
  L.cameras = scene.cameras;
  L.relative_pose = relative_pose(scene.cameras.front(), scene.cameras.back());

  track_labels(scene, sample_track_anchors(scene, cfg.tracks), scene.intrinsics, H, W, L);
  box_tracks(buf.sprite, T, H, W, scene.sprites.size(), cfg.min_box_fraction, L);
  return out;
}

Sample generate_one(std::uint64_t seed, std::size_t index, const GenConfig& cfg) {
  const SceneSpec scene = sample_scene(numcore::mix_seed(seed, index), balanced_class(seed, index), cfg);
  return render_sample(scene, cfg);
}

std::vector<Sample> generate(std::uint64_t seed, std::size_t count, const GenConfig& cfg, std::size_t first_index) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_one(seed, first_index + i, cfg));
  return out;
}

}  // namespace mae4d::synthworld
