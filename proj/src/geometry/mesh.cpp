#include "shapegrasp/geometry/mesh.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

TriMesh TriMesh::build(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  const auto n_vertices = mesh.vertices.size();
  mesh.triangles.reserve(triangles.size());
  for (const auto& t : triangles) {
    if (t[0] >= n_vertices || t[1] >= n_vertices || t[2] >= n_vertices)
      throw Error(ErrorCode::kInvalidArgument, "triangle index out of range");
    const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    if (0.5 * n.norm() < kDegenerateArea) continue;
    mesh.triangles.push_back(t);
    mesh.normals.push_back(n.normalized());
  }

  // Watertight iff every undirected edge is shared by exactly two faces.
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      auto a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  mesh.watertight = !mesh.triangles.empty() &&
                    std::all_of(edge_count.begin(), edge_count.end(),
                                [](const auto& e) { return e.second == 2; });
  return mesh;
}

double TriMesh::triangle_area(std::size_t i) const {
  const auto c = corners(i);
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

double TriMesh::surface_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) a += triangle_area(i);
  return a;
}

double TriMesh::signed_volume() const {
  double v = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto c = corners(i);
    v += c[0].dot(c[1].cross(c[2]));
  }
  return v / 6.0;
}

Box3 TriMesh::bounds() const {
  Box3 box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

TriMesh TriMesh::transformed(const Pose& pose) const {
  TriMesh out = *this;
  for (auto& v : out.vertices) v = pose.apply(v);
  for (auto& n : out.normals) n = pose.apply_direction(n);
  return out;
}

PointCloud PointCloud::transformed(const Pose& pose) const {
  PointCloud out = *this;
  for (auto& p : out.points) p = pose.apply(p);
  for (auto& n : out.normals) n = pose.apply_direction(n);
  return out;
}

void PointCloud::append(const PointCloud& other) {
  const bool keep_normals = (empty() || has_normals()) && other.has_normals();
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (keep_normals) {
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
  } else {
    normals.clear();
  }
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw Error(ErrorCode::kInvalidArgument, "principal point outside the image");
}

Vec3 CameraIntrinsics::pixel_ray(int u, int v) const {
  return {(u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0};
}

}  // namespace shapegrasp
