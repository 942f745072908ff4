// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

namespace mae4d::readout {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// Rigid transform x -> R x + t.
struct SE3Pose {
  Mat3 R{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 t{0, 0, 0};

  Vec3 apply(const Vec3& x) const;
  /// Largest deviation of R^T R from I, and |det R - 1|.
  double orthogonality_error() const;
  double determinant_error() const;
  /// Row-major [R | t] as 12 numbers.
  std::array<double, 12> flatten() const;
  static SE3Pose unflatten(const std::array<double, 12>& v);
};

SE3Pose compose(const SE3Pose& a, const SE3Pose& b);  // a after b
SE3Pose inverse(const SE3Pose& p);

struct ProcrustesResult {
  Mat3 R;
  /// Set when the nearest rotation is not unique; R is then one minimiser.
  bool degenerate = false;
};

/// Nearest rotation in Frobenius norm: R = U diag(1, 1, det(U V^T)) V^T for
/// the SVD M = U S V^T. Throws std::invalid_argument on non-finite input.
ProcrustesResult procrustes_so3(const Mat3& M);

double frobenius_distance(const Mat3& a, const Mat3& b);
double determinant(const Mat3& m);

}  // namespace mae4d::readout
