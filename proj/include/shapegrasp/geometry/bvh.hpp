#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
};

struct ClosestPoint {
  double distance2 = 0.0;
  Vec3 point = Vec3::Zero();
  std::uint32_t triangle = 0;
};

// Oriented box: pose maps box-local coordinates to the parent frame.
struct OrientedBox {
  Pose pose;
  Vec3 half_extents = Vec3::Zero();
};

// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Moller-Trumbore, two-sided. Returns the ray parameter of the hit.
std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                             const Vec3& b, const Vec3& c);

// Separating-axis test between a triangle and an oriented box. Touching
// counts as overlap.
bool triangle_overlaps_box(const std::array<Vec3, 3>& tri, const OrientedBox& box);

// A mesh together with a bounding-volume hierarchy over its triangles.
// Immutable after construction; all queries are const and thread-safe.
class IndexedMesh {
 public:
  explicit IndexedMesh(TriMesh mesh);

  const TriMesh& mesh() const { return mesh_; }

  ClosestPoint closest(const Vec3& q) const;
  std::optional<RayHit> first_hit(const Vec3& origin, const Vec3& dir, double t_min = 0.0,
                                  double t_max = std::numeric_limits<double>::infinity()) const;
  // Number of triangles crossed by the ray for t > 0.
  int count_crossings(const Vec3& origin, const Vec3& dir) const;
  bool overlaps_box(const OrientedBox& box) const;

 private:
  struct Node {
    Box3 box;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t first = 0;
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroids);

  TriMesh mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace shapegrasp
