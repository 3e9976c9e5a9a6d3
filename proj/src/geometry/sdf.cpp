#include "shapegrasp/geometry/sdf.hpp"

#include <array>
#include <cmath>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

// Nine directions spread over the sphere, none aligned with a coordinate
// axis or diagonal so axis-aligned primitives do not produce edge hits.
const std::array<Vec3, 9>& vote_directions() {
  static const std::array<Vec3, 9> dirs = [] {
    std::array<Vec3, 9> d;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < 9; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / 9.0;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden * i + 0.3137;
      d[i] = Vec3(r * std::cos(phi), r * std::sin(phi), z + 0.0123 * (i % 3)).normalized();
    }
    return d;
  }();
  return dirs;
}

}  // namespace

bool is_inside(const IndexedMesh& mesh, const Vec3& query) {
  int votes = 0;
  for (const auto& dir : vote_directions()) {
    if (mesh.count_crossings(query, dir) % 2 == 1) ++votes;
  }
  return votes >= 5;
}

double mesh_sdf(const IndexedMesh& mesh, const Vec3& query) {
  if (!mesh.mesh().watertight) throw Error(ErrorCode::kSdfUndefined, "mesh is not watertight");
  const double d = std::sqrt(mesh.closest(query).distance2);
  return is_inside(mesh, query) ? -d : d;
}

double mesh_sdf(const TriMesh& mesh, const Vec3& query) {
  if (!mesh.watertight) throw Error(ErrorCode::kSdfUndefined, "mesh is not watertight");
  return mesh_sdf(IndexedMesh(mesh), query);
}

std::vector<double> mesh_sdf(const IndexedMesh& mesh, std::span<const Vec3> queries) {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(mesh_sdf(mesh, q));
  return out;
}

}  // namespace shapegrasp
