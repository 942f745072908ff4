// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mae4d/readout/heads.hpp"
#include "mae4d/simplemae/video.hpp"
#include "mae4d/synthworld/render.hpp"

namespace mae4d::harness {

using numcore::Array;
using numcore::Var;
using readout::HeadConfig;
using readout::Task;
using simplemae::Binder;
using simplemae::FeatureMap;
using synthworld::Sample;

/// Linear interpolation along the first axis of [T, K, C] to `target`
/// frames. Output frame i reads input position i * T / target, clamped to
/// T - 1. Identity when T == target.
Var resample_time(const Var& features, std::size_t target = readout::kReadoutFrames);
FeatureMap resample_time(const FeatureMap& features, std::size_t target = readout::kReadoutFrames);

struct MetricInfo {
  std::string name;
  bool higher_is_better = true;
};

/// pose: epe (lower), point: average_jaccard, box: mean_iou, depth: absrel
/// (lower), class: top1.
MetricInfo task_metric(Task task);

/// True when `a` is strictly better than `b` under the task's metric.
bool better(Task task, double a, double b);

/// What a head is trained against for one clip.
///   pose:  target [12] flattened relative pose
///   point: queries [N, 2] frame-0 positions of tracks visible there,
///          target [N, T, 2], valid [N, T] visibility
///   box:   queries [M, 4] frame-0 boxes, target [M, T, 4], valid [M, T]
///   depth: target [T, H, W]
///   class: label
struct TaskExample {
  Array queries;
  Array target;
  Array valid;
  std::size_t label = 0;
};

/// Nothing when the clip offers no query for the task (no track visible in
/// frame 0, or no box). At most `max_items` tracks or boxes are kept.
std::optional<TaskExample> make_example(Task task, const Sample& s, std::size_t max_items);

struct TaskSplit {
  std::vector<Array> frames;  // [T, H, W, 3] per clip
  std::vector<TaskExample> examples;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const { return frames.size(); }
};

struct TaskData {
  Task task = Task::kDepth;
  TaskSplit train;
  TaskSplit val;
  std::size_t height = 32;
  std::size_t width = 32;
};

/// Training clips come from stream `seed` starting at index 0, validation
/// clips from the same stream at kValidationOffset. Clips without a usable
/// example are skipped until the requested counts are reached.
inline constexpr std::size_t kValidationOffset = 1u << 24;
TaskData make_task_data(Task task, std::uint64_t seed, std::size_t train_count, std::size_t val_count,
                        const synthworld::GenConfig& gen, std::size_t max_items);

/// Head outputs for one clip's [16, K, C] features.
Var head_outputs(const Binder& p, const HeadConfig& head, const Var& features, const TaskExample& ex);

/// Training loss of the outputs of head_outputs.
Var task_loss(Task task, const Var& outputs, const TaskExample& ex);

/// Validation metric pooled over clips: tracks, boxes and depth pixels are
/// pooled, poses and classes averaged. Track positions are compared in the
/// clip's own pixels (width x height).
double evaluate_outputs(Task task, const std::vector<Array>& outputs, const std::vector<TaskExample>& examples,
                        std::size_t height, std::size_t width);

}  // namespace mae4d::harness
