#pragma once

#include <span>
#include <vector>

#include "shapegrasp/geometry/bvh.hpp"

namespace shapegrasp {

// Signed distance to a watertight mesh: magnitude is the exact distance to
// the nearest triangle, sign is negative inside. The sign is a majority vote
// over nine fixed-direction ray-parity tests so grazing hits on edges and
// vertices cannot flip it. Throws kSdfUndefined for open meshes.
double mesh_sdf(const IndexedMesh& mesh, const Vec3& query);
double mesh_sdf(const TriMesh& mesh, const Vec3& query);

std::vector<double> mesh_sdf(const IndexedMesh& mesh, std::span<const Vec3> queries);

// Ray-parity inside test used for the SDF sign.
bool is_inside(const IndexedMesh& mesh, const Vec3& query);

}  // namespace shapegrasp
