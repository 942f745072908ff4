// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mae4d/numcore/array.hpp"
#include "mae4d/readout/procrustes.hpp"

namespace mae4d::metrics {

using numcore::Array;
using readout::SE3Pose;
using readout::Vec3;

/// Corners (+-1, +-1, z) for z in {1, 3} in the first camera's frame.
const std::array<Vec3, 8>& cube_points();

/// Mean distance between cube points mapped by `pred` and by `gt`.
double epe_pose(const SE3Pose& pred, const SE3Pose& gt);

inline constexpr double kVisibilityThreshold = 0.5;
inline constexpr std::array<double, 5> kJaccardThresholds{1, 2, 4, 8, 16};

/// Point tracks of one clip in pixel coordinates.
///   pred_xy, gt_xy: [N, T, 2]; pred_visible, gt_visible: [N, T] of 0/1.
struct TrackEval {
  Array pred_xy;
  Array pred_visible;
  Array gt_xy;
  Array gt_visible;
};

/// Visibility decision from a logit: sigmoid(logit) > 0.5.
bool predicted_visible(double logit);

/// Jaccard TP / (TP + FP + FN) at one pixel threshold (distance strictly
/// below it), pooled over tracks and frames 1..T-1. Frame 0 holds the query
/// point and is excluded. An empty denominator gives 1.
double jaccard_at(const TrackEval& e, double threshold);

/// Mean of jaccard_at over kJaccardThresholds. Throws on an empty track set.
double average_jaccard(const TrackEval& e);

/// Depth values outside (kDepthMin, kDepthMax) are masked out.
inline constexpr double kDepthMin = 0.001;
inline constexpr double kDepthMax = 10.0;
inline constexpr double kAbsRelEps = 1e-6;

/// Mean |pred - gt| / (gt + eps) over valid pixels. Throws when no pixel is
/// valid or shapes differ.
double absrel(const Array& pred, const Array& gt, double eps = kAbsRelEps);

/// Boxes are (xmin, xmax, ymin, ymax).
double box_iou(const double* a, const double* b);

struct IouResult {
  double mean = 0.0;
  std::size_t counted = 0;
  /// Zero-area ground-truth boxes skipped.
  std::size_t degenerate = 0;
};

/// IoU averaged over boxes and frames 1..T-1. pred, gt: [N, T, 4];
/// `valid` ([N, T] of 0/1, optional) marks frames where the gt box exists.
IouResult mean_iou(const Array& pred, const Array& gt, const Array& valid = {});

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double top1(const Array& logits, const std::vector<std::size_t>& labels);
std::size_t argmax_row(const Array& logits, std::size_t row);

}  // namespace mae4d::metrics
