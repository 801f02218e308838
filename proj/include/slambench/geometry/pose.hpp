#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace slambench::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

// Rigid body transform: unit quaternion plus translation in meters.
// The quaternion is kept normalized with w >= 0 so equal rotations compare equal.
class Pose {
 public:
  Pose() = default;
  Pose(const Quat& rotation, const Vec3& translation);

  static Pose identity() { return Pose{}; }
  static Pose from_translation(const Vec3& t) { return Pose{Quat::Identity(), t}; }
  static Pose from_rotation(const Quat& q) { return Pose{q, Vec3::Zero()}; }

  // The top-left 3x3 block is projected onto the nearest rotation.
  static Pose from_matrix(const Mat4& m);
  static Pose from_row_major(const std::array<float, 16>& m);

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat4 matrix() const;
  std::array<float, 16> to_row_major_float() const;

  Pose inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

  // Rotation angle in radians, in [0, pi].
  double angle() const;

 private:
  Quat rotation_ = Quat::Identity();
  Vec3 translation_ = Vec3::Zero();
};

// a * b, i.e. apply b first.
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }
inline Pose inverse(const Pose& p) { return p.inverse(); }

Quat canonical(const Quat& q);

// x -> scale * R x + t
struct SimTransform {
  double scale = 1.0;
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  Pose rigid() const { return Pose{rotation, translation}; }
};

}  // namespace slambench::geometry
