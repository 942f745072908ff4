// SPDX-License-Identifier: Apache-2.0
#include "mae4d/synthworld/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "mae4d/simplemae/container.hpp"

namespace mae4d::synthworld {

namespace fs = std::filesystem;
using simplemae::Container;
using simplemae::ContainerError;

namespace {

Array flatten_poses(const std::vector<SE3Pose>& poses) {
  Array a({poses.size(), 12});
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto v = poses[i].flatten();
    for (std::size_t k = 0; k < 12; ++k) a.at({i, k}) = v[k];
  }
  return a;
}

SE3Pose pose_row(const Array& a, std::size_t row) {
  std::array<double, 12> v{};
  for (std::size_t k = 0; k < 12; ++k) v[k] = a[row * 12 + k];
  return SE3Pose::unflatten(v);
}

}  // namespace

void save_sample(const fs::path& path, const Sample& s) {
  Container c;
  c.meta = {{"kind", "clip"},
            {"seed", s.seed},
            {"class_id", s.labels.class_id},
            {"frame_stride", s.clip.frame_stride},
            {"box_sprites", s.labels.box_sprites}};
  c.tensors.set("frames", s.clip.frames);
  c.tensors.set("depth", s.labels.depth);
  c.tensors.set("cameras", flatten_poses(s.labels.cameras));
  c.tensors.set("relative_pose", flatten_poses({s.labels.relative_pose}));
  if (!s.labels.track_xy.empty()) {
    c.tensors.set("track_xy", s.labels.track_xy);
    c.tensors.set("track_visible", s.labels.track_visible);
  }
  if (!s.labels.boxes.empty()) {
    c.tensors.set("boxes", s.labels.boxes);
    c.tensors.set("box_valid", s.labels.box_valid);
  }
  simplemae::write_container(path, c);
}

Sample load_sample(const fs::path& path) {
  const Container c = simplemae::read_container(path);
  if (c.meta.value("kind", "") != "clip") throw ContainerError(path.string() + ": not a clip file");
  Sample s;
  s.seed = c.meta.at("seed").get<std::uint64_t>();
  s.clip.frame_stride = c.meta.value("frame_stride", std::size_t{1});
  s.labels.class_id = c.meta.at("class_id").get<int>();
  s.labels.box_sprites = c.meta.value("box_sprites", std::vector<int>{});
  s.clip.frames = c.tensors.at("frames");
  s.labels.depth = c.tensors.at("depth");
  const Array& cams = c.tensors.at("cameras");
  for (std::size_t i = 0; i < cams.dim(0); ++i) s.labels.cameras.push_back(pose_row(cams, i));
  s.labels.relative_pose = pose_row(c.tensors.at("relative_pose"), 0);
  if (c.tensors.contains("track_xy")) {
    s.labels.track_xy = c.tensors.at("track_xy");
    s.labels.track_visible = c.tensors.at("track_visible");
  }
  if (c.tensors.contains("boxes")) {
    s.labels.boxes = c.tensors.at("boxes");
    s.labels.box_valid = c.tensors.at("box_valid");
  }
  return s;
}

void write_ppm(const fs::path& path, const Array& rgb) {
  if (rgb.rank() != 3 || rgb.dim(2) != 3) {
    throw numcore::ShapeError("write_ppm: expected [H, W, 3], got " + numcore::to_string(rgb.shape()));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << rgb.dim(1) << ' ' << rgb.dim(0) << "\n255\n";
  std::string bytes(rgb.size(), '\0');
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const double v = std::isfinite(rgb[i]) ? rgb[i] : 0.0;
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Array read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (magic != "P6" || maxval != 255 || w == 0 || h == 0) throw std::runtime_error(path.string() + ": not an 8-bit P6 file");
  std::string bytes(w * h * 3, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw std::runtime_error(path.string() + ": truncated pixel data");
  Array out({h, w, 3});
  for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = static_cast<unsigned char>(bytes[i]) / 255.0;
  return out;
}

void write_depth_ppm(const fs::path& path, const Array& depth, double max_depth) {
  if (depth.rank() != 2) throw numcore::ShapeError("write_depth_ppm: expected [H, W], got " + numcore::to_string(depth.shape()));
  Array rgb({depth.dim(0), depth.dim(1), 3});
  for (std::size_t i = 0; i < depth.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) rgb[i * 3 + c] = depth[i] / max_depth;
  write_ppm(path, rgb);
}

Array frame_of(const Array& frames, std::size_t t) {
  if (frames.rank() != 4 || t >= frames.dim(0)) {
    throw numcore::ShapeError("frame_of: frame " + std::to_string(t) + " of " + numcore::to_string(frames.shape()));
  }
  const std::size_t n = frames.dim(1) * frames.dim(2) * frames.dim(3);
  Array out({frames.dim(1), frames.dim(2), frames.dim(3)});
  std::copy_n(frames.data().begin() + static_cast<std::ptrdiff_t>(t * n), n, out.data().begin());
  return out;
}

}  // namespace mae4d::synthworld
