#include "shapegrasp/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "shapegrasp/error.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

SurfaceSamples sample_surface_with_faces(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot sample an empty mesh");
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be positive");

  std::vector<double> cumulative(mesh.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  SurfaceSamples out;
  out.cloud.points.reserve(n);
  out.cloud.normals.reserve(n);
  out.triangles.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto tri = static_cast<std::uint32_t>(it - cumulative.begin());
    // Uniform barycentric sample (square-root parameterisation).
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const auto c = mesh.corners(tri);
    out.cloud.points.push_back((1.0 - r1) * c[0] + r1 * (1.0 - r2) * c[1] + r1 * r2 * c[2]);
    out.cloud.normals.push_back(mesh.normals[tri]);
    out.triangles.push_back(tri);
  }
  return out;
}

PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  return sample_surface_with_faces(mesh, n, seed).cloud;
}

}  // namespace shapegrasp
