// SPDX-License-Identifier: Apache-2.0
#include "mae4d/harness/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mae4d/metrics/losses.hpp"
#include "mae4d/metrics/metrics.hpp"
#include "mae4d/numcore/ops.hpp"

namespace mae4d::harness {

namespace nc = numcore;
using readout::SE3Pose;

Var resample_time(const Var& features, std::size_t target) {
  const auto& s = features.shape();
  if (s.size() != 3 || s[0] == 0) throw nc::ShapeError("resample_time: expected [T, K, C], got " + nc::to_string(s));
  if (target == 0) throw std::invalid_argument("resample_time: target must be positive");
  const std::size_t T = s[0];
  if (T == target) return features;
  std::vector<Var> frames;
  frames.reserve(target);
  for (std::size_t i = 0; i < target; ++i) {
    const double pos = std::min(static_cast<double>(i) * T / target, static_cast<double>(T - 1));
    const auto i0 = static_cast<std::size_t>(pos);
    const double a = pos - i0;
    const Var lo = nc::slice(features, 0, i0, 1);
    if (a == 0.0) {
      frames.push_back(lo);
    } else {
      const Var hi = nc::slice(features, 0, std::min(i0 + 1, T - 1), 1);
      frames.push_back(nc::add(nc::scale(lo, 1.0 - a), nc::scale(hi, a)));
    }
  }
  return nc::concat(frames, 0);
}

FeatureMap resample_time(const FeatureMap& features, std::size_t target) {
  FeatureMap out;
  out.layer_percent = features.layer_percent;
  out.data = resample_time(nc::constant(features.data), target).value();
  return out;
}

MetricInfo task_metric(Task task) {
  switch (task) {
    case Task::kPose: return {"epe", false};
    case Task::kPoint: return {"average_jaccard", true};
    case Task::kBox: return {"mean_iou", true};
    case Task::kDepth: return {"absrel", false};
    case Task::kClass: return {"top1", true};
  }
  throw std::invalid_argument("task_metric: unknown task");
}

bool better(Task task, double a, double b) { return task_metric(task).higher_is_better ? a > b : a < b; }

std::optional<TaskExample> make_example(Task task, const Sample& s, std::size_t max_items) {
  const auto& L = s.labels;
  TaskExample ex;
  switch (task) {
    case Task::kPose: {
      const auto v = L.relative_pose.flatten();
      ex.target = Array({12}, std::vector<double>(v.begin(), v.end()));
      return ex;
    }
    case Task::kDepth:
      ex.target = L.depth;
      return ex;
    case Task::kClass:
      ex.label = static_cast<std::size_t>(L.class_id);
      return ex;
    case Task::kPoint:
    case Task::kBox: {
      const bool point = task == Task::kPoint;
      const Array& items = point ? L.track_xy : L.boxes;
      const Array& valid = point ? L.track_visible : L.box_valid;
      if (items.empty()) return std::nullopt;
      const std::size_t T = items.dim(1), D = items.dim(2);
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < items.dim(0) && keep.size() < max_items; ++i) {
        if (valid.at({i, 0}) > 0.5) keep.push_back(i);
      }
      if (keep.empty()) return std::nullopt;
      ex.queries = Array({keep.size(), D});
      ex.target = Array({keep.size(), T, D});
      ex.valid = Array({keep.size(), T});
      for (std::size_t n = 0; n < keep.size(); ++n) {
        for (std::size_t t = 0; t < T; ++t) {
          ex.valid.at({n, t}) = valid.at({keep[n], t});
          for (std::size_t d = 0; d < D; ++d) ex.target.at({n, t, d}) = items.at({keep[n], t, d});
        }
        for (std::size_t d = 0; d < D; ++d) ex.queries.at({n, d}) = items.at({keep[n], 0, d});
      }
      return ex;
    }
  }
  return std::nullopt;
}

namespace {

void fill_split(TaskSplit& split, Task task, std::uint64_t seed, std::size_t first, std::size_t count,
                const synthworld::GenConfig& gen, std::size_t max_items) {
  const std::size_t limit = first + 20 * count + 20;
  for (std::size_t index = first; split.size() < count; ++index) {
    if (index >= limit) {
      throw std::runtime_error(std::string("could not find ") + std::to_string(count) + " usable clips for task " +
                               readout::to_string(task));
    }
    Sample s = synthworld::generate_one(seed, index, gen);
    auto ex = make_example(task, s, max_items);
    if (!ex) continue;
    split.frames.push_back(std::move(s.clip.frames));
    split.examples.push_back(std::move(*ex));
    split.seeds.push_back(s.seed);
  }
}

}  // namespace

TaskData make_task_data(Task task, std::uint64_t seed, std::size_t train_count, std::size_t val_count,
                        const synthworld::GenConfig& gen, std::size_t max_items) {
  gen.validate();
  if (gen.frames != readout::kReadoutFrames) {
    throw std::invalid_argument("task clips need " + std::to_string(readout::kReadoutFrames) + " frames, got " +
                                std::to_string(gen.frames));
  }
  if (train_count == 0 || val_count == 0) throw std::invalid_argument("task data: empty split requested");
  TaskData d;
  d.task = task;
  d.height = gen.height;
  d.width = gen.width;
  fill_split(d.train, task, seed, 0, train_count, gen, max_items);
  fill_split(d.val, task, seed, kValidationOffset, val_count, gen, max_items);
  return d;
}

Var head_outputs(const Binder& p, const HeadConfig& head, const Var& features, const TaskExample& ex) {
  switch (head.task) {
    case Task::kPose: return readout::pose_forward(p, head, features);
    case Task::kPoint: return readout::point_forward(p, head, features, ex.queries);
    case Task::kBox: return readout::box_forward(p, head, features, ex.queries);
    case Task::kDepth: return readout::depth_forward(p, head, features);
    case Task::kClass: return readout::class_forward(p, head, features);
  }
  throw std::invalid_argument("head_outputs: unknown task");
}

Var task_loss(Task task, const Var& outputs, const TaskExample& ex) {
  switch (task) {
    case Task::kPose: return metrics::pose_loss(outputs, ex.target);
    case Task::kPoint: return metrics::point_track_loss(outputs, ex.target, ex.valid);
    case Task::kBox: return metrics::box_loss(outputs, ex.target, ex.valid);
    case Task::kDepth: return metrics::depth_loss(outputs, ex.target);
    case Task::kClass: return metrics::class_loss(outputs, ex.label);
  }
  throw std::invalid_argument("task_loss: unknown task");
}

namespace {

double evaluate_points(const std::vector<Array>& outputs, const std::vector<TaskExample>& examples, double height,
                       double width) {
  std::size_t n = 0, T = 0;
  for (const auto& ex : examples) {
    n += ex.target.dim(0);
    T = ex.target.dim(1);
  }
  metrics::TrackEval e{Array({n, T, 2}), Array({n, T}), Array({n, T, 2}), Array({n, T})};
  std::size_t row = 0;
  for (std::size_t c = 0; c < examples.size(); ++c) {
    const Array& out = outputs[c];
    const TaskExample& ex = examples[c];
    for (std::size_t i = 0; i < ex.target.dim(0); ++i, ++row) {
      for (std::size_t t = 0; t < T; ++t) {
        e.pred_xy.at({row, t, 0}) = out.at({i, t, 0}) * width;
        e.pred_xy.at({row, t, 1}) = out.at({i, t, 1}) * height;
        e.pred_visible.at({row, t}) = metrics::predicted_visible(out.at({i, t, 2})) ? 1.0 : 0.0;
        e.gt_xy.at({row, t, 0}) = ex.target.at({i, t, 0}) * width;
        e.gt_xy.at({row, t, 1}) = ex.target.at({i, t, 1}) * height;
        e.gt_visible.at({row, t}) = ex.valid.at({i, t});
      }
    }
  }
  return metrics::average_jaccard(e);
}

double evaluate_boxes(const std::vector<Array>& outputs, const std::vector<TaskExample>& examples) {
  std::size_t n = 0, T = 0;
  for (const auto& ex : examples) {
    n += ex.target.dim(0);
    T = ex.target.dim(1);
  }
  Array pred({n, T, 4}), gt({n, T, 4}), valid({n, T});
  std::size_t off = 0, voff = 0;
  for (std::size_t c = 0; c < examples.size(); ++c) {
    const TaskExample& ex = examples[c];
    std::copy(outputs[c].data().begin(), outputs[c].data().end(), pred.data().begin() + off);
    std::copy(ex.target.data().begin(), ex.target.data().end(), gt.data().begin() + off);
    std::copy(ex.valid.data().begin(), ex.valid.data().end(), valid.data().begin() + voff);
    off += ex.target.size();
    voff += ex.valid.size();
  }
  return metrics::mean_iou(pred, gt, valid).mean;
}

}  // namespace

double evaluate_outputs(Task task, const std::vector<Array>& outputs, const std::vector<TaskExample>& examples,
                        std::size_t height, std::size_t width) {
  if (outputs.size() != examples.size() || outputs.empty()) {
    throw std::invalid_argument("evaluate_outputs: " + std::to_string(outputs.size()) + " outputs for " +
                                std::to_string(examples.size()) + " examples");
  }
  switch (task) {
    case Task::kPose: {
      double total = 0.0;
      for (std::size_t c = 0; c < outputs.size(); ++c) {
        std::array<double, 12> v{};
        std::copy_n(examples[c].target.data().begin(), 12, v.begin());
        total += metrics::epe_pose(readout::pose_from_outputs(outputs[c]), SE3Pose::unflatten(v));
      }
      return total / outputs.size();
    }
    case Task::kPoint: return evaluate_points(outputs, examples, height, width);
    case Task::kBox: return evaluate_boxes(outputs, examples);
    case Task::kDepth: {
      std::size_t n = 0;
      for (const auto& ex : examples) n += ex.target.size();
      Array pred({n}), gt({n});
      std::size_t off = 0;
      for (std::size_t c = 0; c < outputs.size(); ++c) {
        std::copy(outputs[c].data().begin(), outputs[c].data().end(), pred.data().begin() + off);
        std::copy(examples[c].target.data().begin(), examples[c].target.data().end(), gt.data().begin() + off);
        off += examples[c].target.size();
      }
      return metrics::absrel(pred, gt);
    }
    case Task::kClass: {
      const std::size_t classes = outputs.front().size();
      Array logits({outputs.size(), classes});
      std::vector<std::size_t> labels;
      for (std::size_t c = 0; c < outputs.size(); ++c) {
        std::copy(outputs[c].data().begin(), outputs[c].data().end(), logits.data().begin() + c * classes);
        labels.push_back(examples[c].label);
      }
      return metrics::top1(logits, labels);
    }
  }
  throw std::invalid_argument("evaluate_outputs: unknown task");
}

}  // namespace mae4d::harness
