// SPDX-License-Identifier: Apache-2.0
#include "mae4d/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mae4d::metrics {

namespace nc = numcore;

const std::array<Vec3, 8>& cube_points() {
  static const std::array<Vec3, 8> kCube = [] {
    std::array<Vec3, 8> c{};
    std::size_t i = 0;
    for (double z : {1.0, 3.0})
      for (double y : {-1.0, 1.0})
        for (double x : {-1.0, 1.0}) c[i++] = {x, y, z};
    return c;
  }();
  return kCube;
}

double epe_pose(const SE3Pose& pred, const SE3Pose& gt) {
  double total = 0.0;
  for (const auto& x : cube_points()) {
    const Vec3 a = gt.apply(x);
    const Vec3 b = pred.apply(x);
    total += std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
  }
  return total / cube_points().size();
}

bool predicted_visible(double logit) { return 1.0 / (1.0 + std::exp(-logit)) > kVisibilityThreshold; }

namespace {

void check_tracks(const TrackEval& e) {
  if (e.gt_xy.empty() || e.gt_xy.rank() != 3 || e.gt_xy.dim(2) != 2) {
    throw nc::ShapeError("average_jaccard: gt_xy must be a non-empty [N, T, 2] array");
  }
  const nc::Shape vis{e.gt_xy.dim(0), e.gt_xy.dim(1)};
  if (e.pred_xy.shape() != e.gt_xy.shape() || e.pred_visible.shape() != vis || e.gt_visible.shape() != vis) {
    throw nc::ShapeError("average_jaccard: inconsistent track shapes " + nc::to_string(e.pred_xy.shape()) + ", " +
                         nc::to_string(e.pred_visible.shape()) + ", " + nc::to_string(e.gt_visible.shape()));
  }
}

}  // namespace

double jaccard_at(const TrackEval& e, double threshold) {
  check_tracks(e);
  const std::size_t n = e.gt_xy.dim(0);
  const std::size_t frames = e.gt_xy.dim(1);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 1; t < frames; ++t) {
      const bool gv = e.gt_visible.at({i, t}) > 0.5;
      const bool pv = e.pred_visible.at({i, t}) > 0.5;
      const double dx = e.pred_xy.at({i, t, 0}) - e.gt_xy.at({i, t, 0});
      const double dy = e.pred_xy.at({i, t, 1}) - e.gt_xy.at({i, t, 1});
      const bool close = dx * dx + dy * dy < threshold * threshold;
      if (gv && pv && close) ++tp;
      else {
        if (pv) ++fp;
        if (gv) ++fn;
      }
    }
  }
  const std::size_t denom = tp + fp + fn;
  return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double average_jaccard(const TrackEval& e) {
  double total = 0.0;
  for (double thr : kJaccardThresholds) total += jaccard_at(e, thr);
  return total / kJaccardThresholds.size();
}

double absrel(const Array& pred, const Array& gt, double eps) {
  if (pred.shape() != gt.shape()) {
    throw nc::ShapeError("absrel: prediction " + nc::to_string(pred.shape()) + " vs target " + nc::to_string(gt.shape()));
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt[i];
    if (!(d > kDepthMin && d < kDepthMax)) continue;
    total += std::abs(pred[i] - d) / (d + eps);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("absrel: no valid target depth in (0.001, 10)");
  return total / count;
}

double box_iou(const double* a, const double* b) {
  const double iw = std::max(0.0, std::min(a[1], b[1]) - std::max(a[0], b[0]));
  const double ih = std::max(0.0, std::min(a[3], b[3]) - std::max(a[2], b[2]));
  const double inter = iw * ih;
  const double area_a = std::max(0.0, a[1] - a[0]) * std::max(0.0, a[3] - a[2]);
  const double area_b = std::max(0.0, b[1] - b[0]) * std::max(0.0, b[3] - b[2]);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

IouResult mean_iou(const Array& pred, const Array& gt, const Array& valid) {
  if (gt.rank() != 3 || gt.dim(2) != 4 || pred.shape() != gt.shape()) {
    throw nc::ShapeError("mean_iou: expected matching [N, T, 4] boxes, got " + nc::to_string(pred.shape()) + " and " +
                         nc::to_string(gt.shape()));
  }
  if (!valid.empty() && valid.shape() != nc::Shape{gt.dim(0), gt.dim(1)}) {
    throw nc::ShapeError("mean_iou: validity mask " + nc::to_string(valid.shape()));
  }
  IouResult r;
  double total = 0.0;
  for (std::size_t i = 0; i < gt.dim(0); ++i) {
    for (std::size_t t = 1; t < gt.dim(1); ++t) {
      if (!valid.empty() && valid.at({i, t}) < 0.5) continue;
      const double* g = gt.ptr() + (i * gt.dim(1) + t) * 4;
      const double* p = pred.ptr() + (i * gt.dim(1) + t) * 4;
      if (!(g[1] > g[0] && g[3] > g[2])) {
        ++r.degenerate;
        continue;
      }
      total += box_iou(p, g);
      ++r.counted;
    }
  }
  r.mean = r.counted ? total / r.counted : 0.0;
  return r;
}

std::size_t argmax_row(const Array& logits, std::size_t row) {
  const std::size_t c = logits.dim(1);
  const double* x = logits.ptr() + row * c;
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j)
    if (x[j] > x[best]) best = j;
  return best;
}

double top1(const Array& logits, const std::vector<std::size_t>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw nc::ShapeError("top1: logits " + nc::to_string(logits.shape()) + " for " + std::to_string(labels.size()) +
                         " labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += argmax_row(logits, i) == labels[i];
  return static_cast<double>(hits) / labels.size();
}

}  // namespace mae4d::metrics
