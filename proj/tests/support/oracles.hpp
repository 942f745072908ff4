// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference implementations, written independently of the
// library code they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mae4d/numcore/array.hpp"
#include "mae4d/numcore/random.hpp"
#include "mae4d/readout/procrustes.hpp"

namespace mae4d::oracle {

using numcore::Array;
using readout::Mat3;

inline double epe(const Mat3& Rp, const double* tp, const Mat3& Rg, const double* tg) {
  double total = 0.0;
  int n = 0;
  for (int zi = 0; zi < 2; ++zi) {
    for (int yi = 0; yi < 2; ++yi) {
      for (int xi = 0; xi < 2; ++xi) {
        const double X[3] = {xi ? 1.0 : -1.0, yi ? 1.0 : -1.0, zi ? 3.0 : 1.0};
        double d2 = 0.0;
        for (int r = 0; r < 3; ++r) {
          double a = tg[r], b = tp[r];
          for (int c = 0; c < 3; ++c) {
            a += Rg[r][c] * X[c];
            b += Rp[r][c] * X[c];
          }
          d2 += (a - b) * (a - b);
        }
        total += std::sqrt(d2);
        ++n;
      }
    }
  }
  return total / n;
}

/// Per-threshold counting over explicit index lists.
inline double average_jaccard(const Array& pred_xy, const Array& pred_vis, const Array& gt_xy, const Array& gt_vis) {
  const std::size_t n = gt_xy.dim(0), frames = gt_xy.dim(1);
  double sum = 0.0;
  for (double thr : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    std::vector<std::pair<std::size_t, std::size_t>> tp, fp, fn;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 1; t < frames; ++t) {
        const double dist = std::hypot(pred_xy.at({i, t, 0}) - gt_xy.at({i, t, 0}), pred_xy.at({i, t, 1}) - gt_xy.at({i, t, 1}));
        const bool g = gt_vis.at({i, t}) == 1.0;
        const bool p = pred_vis.at({i, t}) == 1.0;
        const bool within = dist < thr;
        if (g && p && within) tp.emplace_back(i, t);
        if (p && (!g || !within)) fp.emplace_back(i, t);
        if (g && (!p || !within)) fn.emplace_back(i, t);
      }
    }
    const double denom = static_cast<double>(tp.size() + fp.size() + fn.size());
    sum += denom == 0 ? 1.0 : tp.size() / denom;
  }
  return sum / 5.0;
}

inline double absrel(const Array& pred, const Array& gt) {
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] <= 0.001 || gt[i] >= 10.0) continue;
    s += std::fabs(pred[i] - gt[i]) / (gt[i] + 1e-6);
    ++c;
  }
  return s / c;
}

/// IoU by counting cells of a res x res grid over [lo, hi]^2.
inline double raster_iou(const double* a, const double* b, double lo, double hi, int res) {
  const double step = (hi - lo) / res;
  long inter = 0, uni = 0;
  for (int yi = 0; yi < res; ++yi) {
    const double y = lo + (yi + 0.5) * step;
    for (int xi = 0; xi < res; ++xi) {
      const double x = lo + (xi + 0.5) * step;
      const bool in_a = x >= a[0] && x < a[1] && y >= a[2] && y < a[3];
      const bool in_b = x >= b[0] && x < b[1] && y >= b[2] && y < b[3];
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// BCE with logits written as log(1 + e^z) - y z.
inline double bce(double z, double y) { return softplus(z) - y * z; }

inline double point_loss(const Array& pred, const Array& gt_xy, const Array& gt_vis) {
  const std::size_t n = gt_vis.dim(0), frames = gt_vis.dim(1);
  double pos = 0.0, vis = 0.0, unc = 0.0, visible = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < frames; ++t) {
      const double dx = (pred.at({i, t, 0}) - gt_xy.at({i, t, 0})) * 224.0;
      const double dy = (pred.at({i, t, 1}) - gt_xy.at({i, t, 1})) * 224.0;
      const double d = std::sqrt(dx * dx + dy * dy + 1e-12);
      const double h = d < 1.0 ? 0.5 * d * d : d - 0.5;
      const double g = gt_vis.at({i, t});
      vis += bce(pred.at({i, t, 2}), g);
      if (g == 1.0) {
        pos += h;
        unc += bce(pred.at({i, t, 3}), d > 8.0 ? 1.0 : 0.0);
        visible += 1.0;
      }
    }
  }
  const double m = std::max(visible, 1.0);
  return 100.0 * pos / m + 0.1 * vis / (n * frames) + 0.1 * unc / m;
}

inline double top1(const Array& logits, const std::vector<std::size_t>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // The first index holding the maximum wins.
    double best = -INFINITY;
    for (std::size_t j = 0; j < logits.dim(1); ++j) best = std::max(best, logits.at({i, j}));
    std::size_t first = 0;
    while (logits.at({i, first}) != best) ++first;
    hits += first == labels[i];
  }
  return static_cast<double>(hits) / labels.size();
}

/// Uniform random rotation from a normalised Gaussian quaternion.
inline Mat3 random_rotation(numcore::Rng& rng) {
  double q[4];
  double norm = 0.0;
  for (double& v : q) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : q) v /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
               {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
               {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

}  // namespace mae4d::oracle
