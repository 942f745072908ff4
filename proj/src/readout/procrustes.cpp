// SPDX-License-Identifier: Apache-2.0
#include "mae4d/readout/procrustes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mae4d::readout {

namespace {

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
  return e;
}

Mat3 from_eigen(const Eigen::Matrix3d& e) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = e(i, j);
  return m;
}

constexpr double kDegenerateTol = 1e-12;

}  // namespace

Vec3 SE3Pose::apply(const Vec3& x) const {
  Vec3 y{};
  for (int i = 0; i < 3; ++i) y[i] = R[i][0] * x[0] + R[i][1] * x[1] + R[i][2] * x[2] + t[i];
  return y;
}

double SE3Pose::orthogonality_error() const {
  const Eigen::Matrix3d r = to_eigen(R);
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

double SE3Pose::determinant_error() const { return std::abs(determinant(R) - 1.0); }

std::array<double, 12> SE3Pose::flatten() const {
  std::array<double, 12> v{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) v[4 * i + j] = R[i][j];
    v[4 * i + 3] = t[i];
  }
  return v;
}

SE3Pose SE3Pose::unflatten(const std::array<double, 12>& v) {
  SE3Pose p;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) p.R[i][j] = v[4 * i + j];
    p.t[i] = v[4 * i + 3];
  }
  return p;
}

SE3Pose compose(const SE3Pose& a, const SE3Pose& b) {
  SE3Pose c;
  c.R = from_eigen(to_eigen(a.R) * to_eigen(b.R));
  c.t = a.apply(b.t);
  return c;
}

SE3Pose inverse(const SE3Pose& p) {
  SE3Pose q;
  const Eigen::Matrix3d rt = to_eigen(p.R).transpose();
  q.R = from_eigen(rt);
  const Eigen::Vector3d t = -rt * Eigen::Vector3d(p.t[0], p.t[1], p.t[2]);
  q.t = {t(0), t(1), t(2)};
  return q;
}

ProcrustesResult procrustes_so3(const Mat3& M) {
  for (const auto& row : M)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("procrustes_so3: non-finite input");
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_eigen(M), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d U = svd.matrixU();
  const Eigen::Matrix3d V = svd.matrixV();
  const double d = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = d;
  ProcrustesResult r;
  r.R = from_eigen(U * D * V.transpose());
  const auto s = svd.singularValues();
  // The minimiser is unique unless sigma2 + d * sigma3 vanishes relative to
  // sigma1 (rank <= 1, or a reflection with a tied smallest pair).
  const double scale = std::max(s(0), 1e-300);
  r.degenerate = (s(1) + d * s(2)) <= kDegenerateTol * scale;
  return r;
}

double frobenius_distance(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  return std::sqrt(s);
}

double determinant(const Mat3& m) { return to_eigen(m).determinant(); }

}  // namespace mae4d::readout
