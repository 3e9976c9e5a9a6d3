#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

struct VoxelGridSpec {
  Vec3 origin = Vec3::Zero();  // minimum corner of cell (0,0,0)
  double spacing = 0.0;
  std::array<int, 3> dims = {0, 0, 0};

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  // x-major linear index: x is the slowest-varying axis.
  std::size_t linear(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * dims[1] + iy) * dims[2] + iz;
  }
  std::optional<std::array<int, 3>> cell_of(const Vec3& p) const;
};

struct VoxelGrid {
  VoxelGridSpec spec;
  std::vector<std::uint8_t> occupancy;

  bool occupied(int ix, int iy, int iz) const { return occupancy[spec.linear(ix, iy, iz)] != 0; }
  std::size_t count() const;
};

// Cell occupied iff it holds at least one point; points outside are ignored.
VoxelGrid voxelize(const PointCloud& points, const VoxelGridSpec& spec);

// Grid covering `box` at the given spacing (at least one cell per axis).
VoxelGridSpec grid_covering(const Box3& box, double spacing);

// Fills every (x, y) column between its lowest and highest occupied cell.
void fill_columns_z(VoxelGrid& grid);

}  // namespace shapegrasp
