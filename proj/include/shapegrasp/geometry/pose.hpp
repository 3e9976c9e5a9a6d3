#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace shapegrasp {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Rigid transform x -> rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  Pose inverse() const;
  Mat4 matrix() const;

  friend Pose operator*(const Pose& a, const Pose& b);
};

bool is_rotation(const Mat3& r, double tol = 1e-6);

// Builds T(t, R); throws kInvalidRotation when R is not a proper rotation.
Pose make_transform(const Vec3& t, const Mat3& r);

// Columns are normalize(r1), the normalized part of r2 orthogonal to r1,
// and their cross product. Idempotent bit-for-bit: feeding the first two
// output columns back in returns the same matrix.
Mat3 gram_schmidt_rotation(const Vec3& r1, const Vec3& r2);

// Nearest rotation in the Frobenius sense: U diag(1, 1, det(UV^T)) V^T.
Mat3 procrustes_project(const Mat3& m);

// A rotation that gram_schmidt_rotation maps onto itself bit-for-bit, so
// labels stored as rotations survive a decode round trip exactly.
Mat3 canonical_rotation(const Mat3& r);

Mat3 axis_angle(const Vec3& axis, double angle);
Mat3 rot_z(double angle);

// Geodesic angle between two rotations in radians.
double rotation_angle(const Mat3& a, const Mat3& b);

// Camera-to-world pose for a camera at `eye` looking at `target`, using the
// +z forward, +x right, +y down convention.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& world_up = Vec3::UnitZ());

}  // namespace shapegrasp
