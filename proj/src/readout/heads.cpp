// SPDX-License-Identifier: Apache-2.0
#include "mae4d/readout/heads.hpp"

#include <stdexcept>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/simplemae/video.hpp"

namespace mae4d::readout {

namespace nc = numcore;
namespace sm = simplemae;

const char* to_string(Task task) {
  switch (task) {
    case Task::kPose: return "pose";
    case Task::kPoint: return "point";
    case Task::kBox: return "box";
    case Task::kDepth: return "depth";
    case Task::kClass: return "class";
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  for (auto t : {Task::kPose, Task::kPoint, Task::kBox, Task::kDepth, Task::kClass}) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown task '" + s + "' (expected pose, point, box, depth or class)");
}

HeadConfig make_head_config(Task task, std::size_t tokens, std::size_t channels, const sm::Extent3& clip,
                            const HeadSizes& sizes) {
  HeadConfig h;
  h.task = task;
  h.tokens = tokens;
  h.channels = channels;
  h.clip = clip;
  ReadoutConfig& r = h.readout;
  r.channels = channels;
  r.frames = kReadoutFrames;
  r.qkv_size = sizes.qkv_size;
  r.heads = sizes.heads;
  r.query_mlp_size = sizes.query_mlp_size;
  switch (task) {
    case Task::kPose:
      r.channels = 2 * channels;
      r.frames = 1;
      r.output_size = 12;
      break;
    case Task::kPoint:
      r.query_kind = QueryKind::kFourierPoint;
      r.query_replicas = kPointReplicas;
      r.output_size = (kReadoutFrames / kPointReplicas) * 4;
      h.max_items = sizes.max_tracks;
      break;
    case Task::kBox:
      r.query_kind = QueryKind::kFourierBox;
      r.output_size = kReadoutFrames * 4;
      h.max_items = kMaxBoxes;
      break;
    case Task::kDepth:
      sm::check_divisible(clip, h.depth_patch, "depth output");
      r.query_kind = QueryKind::kSpatialPatch;
      r.num_queries = sm::Extent3{clip.t / h.depth_patch.t, clip.h / h.depth_patch.h, clip.w / h.depth_patch.w}.volume();
      r.output_size = h.depth_patch.volume();
      break;
    case Task::kClass:
      r.output_size = sizes.num_classes;
      break;
  }
  r.validate();
  return h;
}

std::vector<ParamSpec> head_param_specs(const HeadConfig& cfg) {
  std::vector<ParamSpec> specs{{"feature_pos_embed", {kReadoutFrames, cfg.tokens, cfg.channels}, sm::Init::kTruncatedNormal}};
  for (auto& s : readout_param_specs(cfg.readout)) specs.push_back(std::move(s));
  return specs;
}

ParamSet init_head(const HeadConfig& cfg, std::uint64_t seed) {
  ParamSet p = sm::init_params(head_param_specs(cfg), seed);
  if (cfg.task == Task::kPose) {
    const auto identity = SE3Pose{}.flatten();
    p.set("out.b", Array({12}, std::vector<double>(identity.begin(), identity.end())));
  }
  return p;
}

namespace {

Var positioned_features(const Binder& p, const HeadConfig& cfg, const Var& features) {
  const auto& s = features.shape();
  if (s.size() != 3 || s[0] != kReadoutFrames || s[1] != cfg.tokens || s[2] != cfg.channels) {
    throw nc::ShapeError(std::string(to_string(cfg.task)) + " head: features " + nc::to_string(s) + ", expected [" +
                         std::to_string(kReadoutFrames) + ", " + std::to_string(cfg.tokens) + ", " +
                         std::to_string(cfg.channels) + "]");
  }
  return nc::add(features, p("feature_pos_embed"));
}

void check_task(const HeadConfig& cfg, Task want) {
  if (cfg.task != want) {
    throw std::invalid_argument(std::string("head configured for ") + to_string(cfg.task) + ", used as " +
                                to_string(want));
  }
}

void check_items(const HeadConfig& cfg, const Array& coords, std::size_t dims) {
  if (coords.rank() != 2 || coords.dim(1) != dims) {
    throw nc::ShapeError(std::string(to_string(cfg.task)) + " head: queries must be [N, " + std::to_string(dims) +
                         "], got " + nc::to_string(coords.shape()));
  }
  if (coords.dim(0) > cfg.max_items) {
    throw std::invalid_argument(std::string(to_string(cfg.task)) + " head: " + std::to_string(coords.dim(0)) +
                                " queries exceed the maximum of " + std::to_string(cfg.max_items));
  }
}

}  // namespace

Var pose_forward(const Binder& p, const HeadConfig& cfg, const Var& features) {
  check_task(cfg, Task::kPose);
  const Var f = positioned_features(p, cfg, features);
  const Var pair = nc::concat({nc::slice(f, 0, 0, 1), nc::slice(f, 0, kReadoutFrames - 1, 1)}, 2);
  const Var out = readout_forward(p, cfg.readout, pair, readout_queries(p, cfg.readout));
  return nc::reshape(out, {12});
}

SE3Pose pose_from_outputs(const Array& raw) {
  if (raw.size() != 12) throw nc::ShapeError("pose_from_outputs: expected 12 values, got " + nc::to_string(raw.shape()));
  std::array<double, 12> v{};
  for (std::size_t i = 0; i < 12; ++i) v[i] = raw[i];
  SE3Pose pose = SE3Pose::unflatten(v);
  pose.R = procrustes_so3(pose.R).R;
  return pose;
}

Var point_forward(const Binder& p, const HeadConfig& cfg, const Var& features, const Array& query_points) {
  check_task(cfg, Task::kPoint);
  check_items(cfg, query_points, 2);
  const std::size_t n = query_points.dim(0);
  const Var f = positioned_features(p, cfg, features);
  const Var out = readout_forward(p, cfg.readout, f, readout_queries(p, cfg.readout, query_points));
  const Var per_frame = nc::reshape(out, {n, kReadoutFrames, 4});
  return nc::concat({nc::sigmoid(nc::slice(per_frame, 2, 0, 2)), nc::slice(per_frame, 2, 2, 2)}, 2);
}

Var box_forward(const Binder& p, const HeadConfig& cfg, const Var& features, const Array& boxes) {
  check_task(cfg, Task::kBox);
  check_items(cfg, boxes, 4);
  const Var f = positioned_features(p, cfg, features);
  const Var out = readout_forward(p, cfg.readout, f, readout_queries(p, cfg.readout, boxes));
  return nc::reshape(out, {boxes.dim(0), kReadoutFrames, 4});
}

Var depth_forward(const Binder& p, const HeadConfig& cfg, const Var& features) {
  check_task(cfg, Task::kDepth);
  const sm::Extent3 grid{cfg.clip.t / cfg.depth_patch.t, cfg.clip.h / cfg.depth_patch.h,
                         cfg.clip.w / cfg.depth_patch.w};
  Array centres({grid.volume(), 3});
  std::size_t row = 0;
  for (std::size_t t = 0; t < grid.t; ++t)
    for (std::size_t y = 0; y < grid.h; ++y)
      for (std::size_t x = 0; x < grid.w; ++x, ++row) {
        centres.at({row, 0}) = (t + 0.5) / grid.t;
        centres.at({row, 1}) = (y + 0.5) / grid.h;
        centres.at({row, 2}) = (x + 0.5) / grid.w;
      }
  const Var f = positioned_features(p, cfg, features);
  const Var out = nc::softplus(readout_forward(p, cfg.readout, f, readout_queries(p, cfg.readout, centres)));
  const Var blocks = nc::reshape(out, {grid.t, grid.h, grid.w, cfg.depth_patch.t, cfg.depth_patch.h, cfg.depth_patch.w});
  return nc::reshape(nc::permute(blocks, {0, 3, 1, 4, 2, 5}), {cfg.clip.t, cfg.clip.h, cfg.clip.w});
}

Var class_forward(const Binder& p, const HeadConfig& cfg, const Var& features) {
  check_task(cfg, Task::kClass);
  const Var f = positioned_features(p, cfg, features);
  const Var out = readout_forward(p, cfg.readout, f, readout_queries(p, cfg.readout));
  return nc::reshape(out, {cfg.readout.output_size});
}

}  // namespace mae4d::readout
