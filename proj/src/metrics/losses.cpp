// SPDX-License-Identifier: Apache-2.0
#include "mae4d/metrics/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mae4d/metrics/metrics.hpp"
#include "mae4d/numcore/ops.hpp"

namespace mae4d::metrics {

namespace nc = numcore;

namespace {

Var masked_mean(const Var& values, const Array& mask) {
  double count = 0.0;
  for (double m : mask.data()) count += m;
  return nc::scale(nc::sum(nc::mul(values, nc::constant(mask))), 1.0 / std::max(count, 1.0));
}

}  // namespace

Var point_track_loss(const Var& pred, const Array& gt_xy, const Array& gt_visible) {
  const auto& s = pred.shape();
  if (s.size() != 3 || s[2] != 4 || gt_xy.shape() != nc::Shape{s[0], s[1], 2} ||
      gt_visible.shape() != nc::Shape{s[0], s[1]}) {
    throw nc::ShapeError("point_track_loss: pred " + nc::to_string(s) + ", gt " + nc::to_string(gt_xy.shape()) +
                         ", visibility " + nc::to_string(gt_visible.shape()));
  }
  const nc::Shape nt{s[0], s[1]};
  const Var diff = nc::scale(nc::sub(nc::slice(pred, 2, 0, 2), nc::constant(gt_xy)), kTrackPixelScale);
  const Var dist = nc::sqrt(nc::add_scalar(nc::sum_last(nc::square(diff)), kDistanceEps));
  const Var position = masked_mean(nc::huber(dist, kHuberDelta), gt_visible);

  const Var vis_logits = nc::reshape(nc::slice(pred, 2, 2, 1), nt);
  const Var visibility = nc::mean(nc::bce_with_logits(vis_logits, gt_visible));

  Array unc_target(nt, 0.0);
  for (std::size_t i = 0; i < unc_target.size(); ++i) unc_target[i] = dist.value()[i] > kUncertaintyPixels ? 1.0 : 0.0;
  const Var unc_logits = nc::reshape(nc::slice(pred, 2, 3, 1), nt);
  const Var uncertainty = masked_mean(nc::bce_with_logits(unc_logits, unc_target), gt_visible);

  return nc::add(nc::add(nc::scale(position, kPositionWeight), nc::scale(visibility, kVisibilityWeight)),
                 nc::scale(uncertainty, kUncertaintyWeight));
}

Var pose_loss(const Var& pred, const Array& gt) {
  if (pred.shape() != nc::Shape{12} || gt.size() != 12) {
    throw nc::ShapeError("pose_loss: expected 12 values, got " + nc::to_string(pred.shape()) + " and " +
                         nc::to_string(gt.shape()));
  }
  return nc::sum(nc::square(nc::sub(pred, nc::constant(gt.reshaped({12})))));
}

Var depth_loss(const Var& pred, const Array& gt) {
  if (pred.shape() != gt.shape()) {
    throw nc::ShapeError("depth_loss: prediction " + nc::to_string(pred.shape()) + " vs target " +
                         nc::to_string(gt.shape()));
  }
  Array mask(gt.shape(), 0.0);
  Array target = gt;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool ok = gt[i] > kDepthMin && gt[i] < kDepthMax;
    mask[i] = ok ? 1.0 : 0.0;
    if (!ok) target[i] = 0.0;
  }
  return masked_mean(nc::square(nc::sub(pred, nc::constant(target))), mask);
}

Var box_loss(const Var& pred, const Array& gt, const Array& valid) {
  const auto& s = pred.shape();
  if (s.size() != 3 || s[2] != 4 || gt.shape() != s) {
    throw nc::ShapeError("box_loss: pred " + nc::to_string(s) + " vs gt " + nc::to_string(gt.shape()));
  }
  Array mask(s, 1.0);
  if (!valid.empty()) {
    if (valid.shape() != nc::Shape{s[0], s[1]}) throw nc::ShapeError("box_loss: mask " + nc::to_string(valid.shape()));
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = valid[i / 4];
  }
  return masked_mean(nc::square(nc::sub(pred, nc::constant(gt))), mask);
}

Var class_loss(const Var& logits, std::size_t label) {
  if (logits.shape().size() != 1 || label >= logits.shape()[0]) {
    throw std::invalid_argument("class_loss: label " + std::to_string(label) + " for logits " +
                                nc::to_string(logits.shape()));
  }
  return nc::scale(nc::sum(nc::slice(nc::log_softmax(logits), 0, label, 1)), -1.0);
}

}  // namespace mae4d::metrics
