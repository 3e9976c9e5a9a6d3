#pragma once

#include <cstdint>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

struct SurfaceSamples {
  PointCloud cloud;  // points with the owning face's outward normal
  std::vector<std::uint32_t> triangles;
};

// Area-proportional surface sampling; bit-identical for a fixed seed.
// Throws kEmptyMesh for meshes without triangles and kInvalidArgument for n == 0.
SurfaceSamples sample_surface_with_faces(const TriMesh& mesh, std::size_t n, std::uint64_t seed);
PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace shapegrasp
