#include "shapegrasp/geometry/pose.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Pose make_transform(const Vec3& t, const Mat3& r) {
  if (!is_rotation(r)) throw Error(ErrorCode::kInvalidRotation, "matrix is not a proper rotation");
  if (!t.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite translation");
  Pose p;
  p.rotation = r;
  p.translation = t;
  return p;
}

Mat3 gram_schmidt_rotation(const Vec3& r1, const Vec3& r2) {
  const double n1 = r1.norm();
  const double n2 = r2.norm();
  if (!(n1 > 1e-12) || !(n2 > 1e-12) || !r1.allFinite() || !r2.allFinite())
    throw Error(ErrorCode::kDegenerateRotation, "zero-length rotation component");
  // sin of the angle between r1 and r2 must exceed sin(1e-4).
  if (r1.cross(r2).norm() / (n1 * n2) <= std::sin(1e-4))
    throw Error(ErrorCode::kDegenerateRotation, "rotation components are parallel");
  Mat3 r;
  // Inputs that are already orthonormal up to rounding are kept verbatim.
  // This makes the map idempotent bit-for-bit, so a stored rotation decodes
  // back to exactly itself.
  constexpr double kOrthoTol = 1e-14;
  if (std::abs(r1.squaredNorm() - 1.0) <= kOrthoTol && std::abs(r2.squaredNorm() - 1.0) <= kOrthoTol &&
      std::abs(r1.dot(r2)) <= kOrthoTol) {
    r.col(0) = r1;
    r.col(1) = r2;
    r.col(2) = r1.cross(r2);
    return r;
  }
  const Vec3 b1 = r1 / n1;
  const Vec3 u = r2 - b1.dot(r2) * b1;
  const Vec3 b2 = u / u.norm();
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b1.cross(b2);
  return r;
}

Mat3 procrustes_project(const Mat3& m) {
  if (!m.allFinite()) throw Error(ErrorCode::kDegenerateRotation, "non-finite matrix");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() <= 1e-9)
    throw Error(ErrorCode::kDegenerateRotation, "matrix is rank deficient");
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return u * d.asDiagonal() * v.transpose();
}

Mat3 canonical_rotation(const Mat3& r) { return gram_schmidt_rotation(r.col(0), r.col(1)); }

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& world_up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(world_up);
  if (x.norm() < 1e-9) x = z.cross(Vec3::UnitY());
  x.normalize();
  const Vec3 y = z.cross(x);
  Pose p;
  p.rotation.col(0) = x;
  p.rotation.col(1) = y;
  p.rotation.col(2) = z;
  p.translation = eye;
  return p;
}

}  // namespace shapegrasp
