// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "mae4d/readout/procrustes.hpp"
#include "mae4d/readout/readout.hpp"
#include "mae4d/simplemae/config.hpp"

namespace mae4d::readout {

enum class Task { kPose, kPoint, kBox, kDepth, kClass };

const char* to_string(Task task);
/// Accepts "pose", "point", "box", "depth", "class".
Task task_from_string(const std::string& s);

/// Frames every feature map is resampled to before a readout.
inline constexpr std::size_t kReadoutFrames = 16;
inline constexpr std::size_t kMaxBoxes = 25;
inline constexpr std::size_t kPointReplicas = 8;

/// Readout widths; the published heads use 256..1024 channels, desk-scale
/// runs shrink them.
struct HeadSizes {
  std::size_t qkv_size = 64;
  std::size_t heads = 4;
  std::size_t query_mlp_size = 64;
  std::size_t num_classes = 8;
  std::size_t max_tracks = 64;
};

struct HeadConfig {
  Task task = Task::kClass;
  ReadoutConfig readout;
  std::size_t tokens = 0;    // K of the feature map
  std::size_t channels = 0;  // C of the feature map
  std::size_t max_items = 0;
  simplemae::Extent3 clip{16, 32, 32};
  simplemae::Extent3 depth_patch{2, 8, 8};
};

HeadConfig make_head_config(Task task, std::size_t tokens, std::size_t channels, const simplemae::Extent3& clip,
                            const HeadSizes& sizes = {});

/// Readout parameters plus the learnable [16, K, C] positional embedding
/// ("feature_pos_embed") added to the features.
std::vector<ParamSpec> head_param_specs(const HeadConfig& cfg);

/// Initialised head; the pose head's final bias is set to the flattened
/// identity pose [I | 0].
ParamSet init_head(const HeadConfig& cfg, std::uint64_t seed);

/// 12 raw outputs, row-major [R | t].
Var pose_forward(const Binder& p, const HeadConfig& cfg, const Var& features);
/// Raw outputs projected to SE(3) (rotation via Procrustes).
SE3Pose pose_from_outputs(const Array& raw);

/// [N, 16, 4] per track and frame: (x, y) after sigmoid, visibility logit,
/// uncertainty logit. query_points: [N, 2] (x, y) in [0, 1] in frame 0.
Var point_forward(const Binder& p, const HeadConfig& cfg, const Var& features, const Array& query_points);

/// [N, 16, 4] (xmin, xmax, ymin, ymax) per box and frame, no activation.
/// boxes: [N, 4] first-frame boxes in [0, 1].
Var box_forward(const Binder& p, const HeadConfig& cfg, const Var& features, const Array& boxes);

/// Depth [T, H, W] from one query per depth_patch block, softplus output.
Var depth_forward(const Binder& p, const HeadConfig& cfg, const Var& features);

/// Class logits [num_classes] from one learned query.
Var class_forward(const Binder& p, const HeadConfig& cfg, const Var& features);

}  // namespace mae4d::readout
