// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "mae4d/numcore/autodiff.hpp"

namespace mae4d::metrics {

using numcore::Array;
using numcore::Var;

/// Track coordinates are compared in a 224-pixel frame.
inline constexpr double kTrackPixelScale = 224.0;
inline constexpr double kHuberDelta = 1.0;
/// Uncertainty target is 1 where the position error exceeds this (pixels).
inline constexpr double kUncertaintyPixels = 8.0;
inline constexpr double kPositionWeight = 100.0;
inline constexpr double kVisibilityWeight = 0.1;
inline constexpr double kUncertaintyWeight = 0.1;
/// Added under the square root of the position error so its gradient stays
/// finite at zero error.
inline constexpr double kDistanceEps = 1e-12;

/// 100 * Huber(position error) + 0.1 * BCE(visibility) + 0.1 * BCE(uncertainty).
///
/// pred: [N, T, 4] of (x, y) in [0, 1] and the visibility and uncertainty
/// logits. gt_xy: [N, T, 2] in [0, 1]; gt_visible: [N, T] of 0/1.
/// The Huber and uncertainty terms average over gt-visible entries only;
/// visibility BCE averages over all entries. The uncertainty target uses the
/// current (non-differentiated) position error.
Var point_track_loss(const Var& pred, const Array& gt_xy, const Array& gt_visible);

/// Sum of squared differences over the 12 raw pose outputs.
Var pose_loss(const Var& pred, const Array& gt);

/// Mean squared error over pixels whose target depth lies in (0.001, 10).
Var depth_loss(const Var& pred, const Array& gt);

/// Mean squared coordinate error over valid (box, frame) entries.
/// valid: [N, T] of 0/1 or empty for all valid.
Var box_loss(const Var& pred, const Array& gt, const Array& valid = {});

/// Softmax cross-entropy of a logit vector against a class index.
Var class_loss(const Var& logits, std::size_t label);

}  // namespace mae4d::metrics
