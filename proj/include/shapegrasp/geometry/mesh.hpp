#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Geometry>

#include "shapegrasp/geometry/pose.hpp"

namespace shapegrasp {

using Box3 = Eigen::AlignedBox3d;
using Triangle = std::array<std::uint32_t, 3>;

// Triangle mesh with per-face outward normals. Construct through
// TriMesh::build so degenerate faces are dropped and the watertight flag
// is computed.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;
  bool watertight = false;

  static constexpr double kDegenerateArea = 1e-12;

  static TriMesh build(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  bool empty() const { return triangles.empty(); }
  std::size_t size() const { return triangles.size(); }
  double triangle_area(std::size_t i) const;
  double surface_area() const;
  // Signed volume via the divergence theorem; positive for outward winding.
  double signed_volume() const;
  Box3 bounds() const;
  std::array<Vec3, 3> corners(std::size_t i) const {
    const auto& t = triangles[i];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
  TriMesh transformed(const Pose& pose) const;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty or one per point

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  bool has_normals() const { return !normals.empty() && normals.size() == points.size(); }
  PointCloud transformed(const Pose& pose) const;
  void append(const PointCloud& other);
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws kInvalidArgument unless fx, fy > 0 and the principal point lies
  // inside the image.
  void validate() const;
  // Ray direction through the centre of pixel (u, v), z component 1.
  Vec3 pixel_ray(int u, int v) const;
};

}  // namespace shapegrasp
