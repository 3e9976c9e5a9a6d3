#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

// ASCII OBJ: v and f records, 1-based indices; polygons are fan-triangulated
// and texture/normal references ("f 1/2/3") are ignored.
TriMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const TriMesh& mesh);

// Binary little-endian PLY with float32 vertices and uint32 face indices.
TriMesh load_ply(const std::string& path);
void save_ply(const std::string& path, const TriMesh& mesh);

// Dispatches on the file extension (.obj / .ply).
TriMesh load_mesh(const std::string& path);

using Color = std::array<std::uint8_t, 3>;

struct PlyEdge {
  std::uint32_t a = 0, b = 0;
  Color color{255, 255, 255};
};

// ASCII PLY point cloud, optionally with normals, per-point colours and an
// edge element for line overlays.
void save_point_cloud_ply(const std::string& path, const PointCloud& cloud,
                          const std::vector<Color>& colors = {}, const std::vector<PlyEdge>& edges = {});
PointCloud load_point_cloud_ply(const std::string& path);

}  // namespace shapegrasp
