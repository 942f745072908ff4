// SPDX-License-Identifier: Apache-2.0
#include "mae4d/synthworld/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mae4d::synthworld {

CropWindow identity_window(std::size_t height, std::size_t width) {
  return {0.0, 0.0, static_cast<double>(width), static_cast<double>(height), 0, false};
}

Intrinsics cropped_intrinsics(const Intrinsics& k, const CropWindow& w, std::size_t out_height, std::size_t out_width) {
  const double sx = static_cast<double>(out_width) / w.width;
  const double sy = static_cast<double>(out_height) / w.height;
  return {k.fx * sx, k.fy * sy, (k.cx - w.x0) * sx, (k.cy - w.y0) * sy};
}

namespace {

double bilinear(const Array& frames, std::size_t t, std::size_t c, double xs, double ys) {
  const std::size_t H = frames.dim(1), W = frames.dim(2);
  xs = std::clamp(xs, 0.0, static_cast<double>(W - 1));
  ys = std::clamp(ys, 0.0, static_cast<double>(H - 1));
  const std::size_t x0 = static_cast<std::size_t>(xs), y0 = static_cast<std::size_t>(ys);
  const std::size_t x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
  const double a = xs - x0, b = ys - y0;
  auto px = [&](std::size_t y, std::size_t x) { return frames[((t * H + y) * W + x) * 3 + c]; };
  return (px(y0, x0) * (1 - a) + px(y0, x1) * a) * (1 - b) + (px(y1, x0) * (1 - a) + px(y1, x1) * a) * b;
}

}  // namespace

namespace {

void check_window(const Array& src, const CropWindow& w, std::size_t out_frames) {
  const std::size_t T = src.dim(0), H = src.dim(1), W = src.dim(2);
  if (w.t0 + out_frames > T || w.width <= 0 || w.height <= 0 || w.x0 < 0 || w.y0 < 0 ||
      w.x0 + w.width > W + 1e-9 || w.y0 + w.height > H + 1e-9) {
    throw std::invalid_argument("apply_window: window does not fit the " + std::to_string(T) + "x" +
                                std::to_string(H) + "x" + std::to_string(W) + " clip");
  }
}

}  // namespace

Array crop_frames(const Array& src, const CropWindow& w, std::size_t out_frames, std::size_t out_height,
                  std::size_t out_width) {
  if (src.rank() != 4 || src.dim(3) != 3) {
    throw numcore::ShapeError("crop_frames: expected [T, H, W, 3], got " + numcore::to_string(src.shape()));
  }
  check_window(src, w, out_frames);
  const double sx = w.width / out_width, sy = w.height / out_height;
  Array out({out_frames, out_height, out_width, 3});
  for (std::size_t t = 0; t < out_frames; ++t)
    for (std::size_t y = 0; y < out_height; ++y)
      for (std::size_t x = 0; x < out_width; ++x) {
        const std::size_t xo = w.flip ? out_width - 1 - x : x;
        for (std::size_t c = 0; c < 3; ++c) {
          out.at({t, y, xo, c}) = bilinear(src, w.t0 + t, c, w.x0 + (x + 0.5) * sx - 0.5, w.y0 + (y + 0.5) * sy - 0.5);
        }
      }
  return out;
}

Sample apply_window(const Sample& in, const CropWindow& w, std::size_t out_frames, std::size_t out_height,
                    std::size_t out_width) {
  const Array& src = in.clip.frames;
  check_window(src, w, out_frames);
  const std::size_t H = src.dim(1), W = src.dim(2);
  const double sx = w.width / out_width, sy = w.height / out_height;
  auto src_x = [&](std::size_t x) { return w.x0 + (x + 0.5) * sx; };
  auto src_y = [&](std::size_t y) { return w.y0 + (y + 0.5) * sy; };

  Sample out;
  out.seed = in.seed;
  out.clip.frame_stride = in.clip.frame_stride;
  out.clip.frames = Array({out_frames, out_height, out_width, 3});
  const SceneLabels& L = in.labels;
  SceneLabels& O = out.labels;
  O.class_id = L.class_id;
  O.depth = Array({out_frames, out_height, out_width});
  for (std::size_t t = 0; t < out_frames; ++t) {
    for (std::size_t y = 0; y < out_height; ++y) {
      for (std::size_t x = 0; x < out_width; ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          out.clip.frames.at({t, y, x, c}) = bilinear(src, w.t0 + t, c, src_x(x) - 0.5, src_y(y) - 0.5);
        }
        const auto xn = std::min(static_cast<std::size_t>(src_x(x)), W - 1);
        const auto yn = std::min(static_cast<std::size_t>(src_y(y)), H - 1);
        O.depth.at({t, y, x}) = L.depth.at({w.t0 + t, yn, xn});
      }
    }
  }

  O.cameras.assign(L.cameras.begin() + w.t0, L.cameras.begin() + w.t0 + out_frames);
  O.relative_pose = relative_pose(O.cameras.front(), O.cameras.back());

  if (!L.track_xy.empty()) {
    const std::size_t n = L.track_xy.dim(0);
    O.track_xy = Array({n, out_frames, 2});
    O.track_visible = Array({n, out_frames});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < out_frames; ++t) {
        const double x = (L.track_xy.at({i, w.t0 + t, 0}) * W - w.x0) / w.width;
        const double y = (L.track_xy.at({i, w.t0 + t, 1}) * H - w.y0) / w.height;
        O.track_xy.at({i, t, 0}) = x;
        O.track_xy.at({i, t, 1}) = y;
        const bool inside = x >= 0 && x < 1 && y >= 0 && y < 1;
        O.track_visible.at({i, t}) = inside ? L.track_visible.at({i, w.t0 + t}) : 0.0;
      }
    }
  }

  if (!L.boxes.empty()) {
    const std::size_t m = L.boxes.dim(0);
    O.boxes = Array({m, out_frames, 4});
    O.box_valid = Array({m, out_frames});
    O.box_sprites = L.box_sprites;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t t = 0; t < out_frames; ++t) {
        if (L.box_valid.at({i, w.t0 + t}) == 0.0) continue;
        const double x0 = std::clamp((L.boxes.at({i, w.t0 + t, 0}) * W - w.x0) / w.width, 0.0, 1.0);
        const double x1 = std::clamp((L.boxes.at({i, w.t0 + t, 1}) * W - w.x0) / w.width, 0.0, 1.0);
        const double y0 = std::clamp((L.boxes.at({i, w.t0 + t, 2}) * H - w.y0) / w.height, 0.0, 1.0);
        const double y1 = std::clamp((L.boxes.at({i, w.t0 + t, 3}) * H - w.y0) / w.height, 0.0, 1.0);
        if (x1 <= x0 || y1 <= y0) continue;
        O.box_valid.at({i, t}) = 1.0;
        O.boxes.at({i, t, 0}) = x0;
        O.boxes.at({i, t, 1}) = x1;
        O.boxes.at({i, t, 2}) = y0;
        O.boxes.at({i, t, 3}) = y1;
      }
    }
  }
  return w.flip ? flip_horizontal(out) : out;
}

Sample flip_horizontal(const Sample& in) {
  Sample out = in;
  const Array& src = in.clip.frames;
  const std::size_t T = src.dim(0), H = src.dim(1), W = src.dim(2);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        for (std::size_t c = 0; c < 3; ++c) out.clip.frames.at({t, y, x, c}) = src.at({t, y, W - 1 - x, c});
        out.labels.depth.at({t, y, x}) = in.labels.depth.at({t, y, W - 1 - x});
      }
    }
  }
  // Mirroring the world in x: R -> M R M, t -> M t with M = diag(-1, 1, 1).
  auto mirror = [](SE3Pose p) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if ((r == 0) != (c == 0)) p.R[r][c] = -p.R[r][c];
    p.t[0] = -p.t[0];
    return p;
  };
  for (auto& cam : out.labels.cameras) cam = mirror(cam);
  out.labels.relative_pose = mirror(in.labels.relative_pose);
  for (std::size_t i = 0; i < out.labels.track_xy.size(); i += 2) out.labels.track_xy[i] = 1.0 - in.labels.track_xy[i];
  for (std::size_t i = 0; i < out.labels.boxes.size(); i += 4) {
    out.labels.boxes[i] = 1.0 - in.labels.boxes[i + 1];
    out.labels.boxes[i + 1] = 1.0 - in.labels.boxes[i];
  }
  out.labels.class_id = mirrored_class(in.labels.class_id);
  return out;
}

CropWindow random_window(numcore::Rng& rng, std::size_t src_frames, std::size_t src_height, std::size_t src_width,
                         std::size_t out_frames, double area_lo, double area_hi, double aspect_lo, double aspect_hi) {
  if (out_frames > src_frames) throw std::invalid_argument("random_window: more output frames than source frames");
  const double H = static_cast<double>(src_height), W = static_cast<double>(src_width);
  CropWindow w;
  for (int attempt = 0; attempt < 20; ++attempt) {
    const double area = rng.uniform(area_lo, area_hi) * H * W;
    const double aspect = std::exp(rng.uniform(std::log(aspect_lo), std::log(aspect_hi)));
    const double cw = std::sqrt(area * aspect), ch = std::sqrt(area / aspect);
    if (cw <= W && ch <= H) {
      w.width = cw;
      w.height = ch;
      break;
    }
  }
  if (w.width == 0.0) {
    // Fall back to the largest centred window.
    w.width = W;
    w.height = H;
  }
  w.x0 = rng.uniform(0.0, W - w.width);
  w.y0 = rng.uniform(0.0, H - w.height);
  w.t0 = rng.index(src_frames - out_frames + 1);
  w.flip = rng.coin();
  return w;
}

CropWindow pretrain_window(numcore::Rng& rng, std::size_t src_frames, std::size_t src_height, std::size_t src_width,
                           std::size_t out_frames, double resize) {
  if (resize < 1.0) throw std::invalid_argument("pretrain_window: resize factor below 1");
  if (out_frames > src_frames) throw std::invalid_argument("pretrain_window: more output frames than source frames");
  CropWindow w;
  w.width = src_width / resize;
  w.height = src_height / resize;
  w.x0 = rng.uniform(0.0, src_width - w.width);
  w.y0 = rng.uniform(0.0, src_height - w.height);
  w.t0 = rng.index(src_frames - out_frames + 1);
  w.flip = rng.coin();
  return w;
}

}  // namespace mae4d::synthworld
