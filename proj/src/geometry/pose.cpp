#include "slambench/geometry/pose.hpp"

#include <cmath>

namespace slambench::geometry {

Quat canonical(const Quat& q) {
  Quat n = q.normalized();
  if (n.w() < 0.0) n.coeffs() = -n.coeffs();
  return n;
}

Pose::Pose(const Quat& rotation, const Vec3& translation)
    : rotation_(canonical(rotation)), translation_(translation) {}

Pose Pose::from_matrix(const Mat4& m) {
  Mat3 r = m.topLeftCorner<3, 3>();
  // Project onto SO(3) first so slightly non-orthonormal input (e.g. float32) is tolerated.
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Mat3 s = Mat3::Identity();
  if ((u * v.transpose()).determinant() < 0.0) s(2, 2) = -1.0;
  r = u * s * v.transpose();
  return Pose{Quat(r), m.topRightCorner<3, 1>()};
}

Pose Pose::from_row_major(const std::array<float, 16>& m) {
  Mat4 mat;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) mat(r, c) = static_cast<double>(m[static_cast<std::size_t>(r * 4 + c)]);
  return from_matrix(mat);
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

std::array<float, 16> Pose::to_row_major_float() const {
  const Mat4 m = matrix();
  std::array<float, 16> out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(r * 4 + c)] = static_cast<float>(m(r, c));
  return out;
}

Pose Pose::inverse() const {
  const Quat qi = rotation_.conjugate();
  return Pose{qi, -(qi * translation_)};
}

double Pose::angle() const {
  const double v = rotation_.vec().norm();
  return 2.0 * std::atan2(v, std::abs(rotation_.w()));
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

}  // namespace slambench::geometry
