#include "shapegrasp/geometry/voxel.hpp"

#include <algorithm>
#include <cmath>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

std::optional<std::array<int, 3>> VoxelGridSpec::cell_of(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - origin[a]) / spacing);
    if (!(f >= 0.0) || f >= dims[a]) return std::nullopt;
    c[a] = static_cast<int>(f);
  }
  return c;
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

VoxelGrid voxelize(const PointCloud& points, const VoxelGridSpec& spec) {
  if (!(spec.spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "voxel spacing must be positive");
  if (spec.dims[0] <= 0 || spec.dims[1] <= 0 || spec.dims[2] <= 0)
    throw Error(ErrorCode::kInvalidArgument, "voxel grid dims must be positive");
  VoxelGrid grid;
  grid.spec = spec;
  grid.occupancy.assign(spec.cell_count(), 0);
  for (const auto& p : points.points) {
    if (const auto c = spec.cell_of(p)) grid.occupancy[spec.linear((*c)[0], (*c)[1], (*c)[2])] = 1;
  }
  return grid;
}

VoxelGridSpec grid_covering(const Box3& box, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "voxel spacing must be positive");
  VoxelGridSpec spec;
  spec.origin = box.min();
  spec.spacing = spacing;
  for (int a = 0; a < 3; ++a) {
    // +1 so points on the max face still land inside.
    spec.dims[a] = std::max(1, static_cast<int>(std::floor(box.sizes()[a] / spacing)) + 1);
  }
  return spec;
}

void fill_columns_z(VoxelGrid& grid) {
  const auto& d = grid.spec.dims;
  for (int ix = 0; ix < d[0]; ++ix) {
    for (int iy = 0; iy < d[1]; ++iy) {
      int lo = -1, hi = -1;
      for (int iz = 0; iz < d[2]; ++iz) {
        if (grid.occupied(ix, iy, iz)) {
          if (lo < 0) lo = iz;
          hi = iz;
        }
      }
      for (int iz = lo; lo >= 0 && iz <= hi; ++iz) grid.occupancy[grid.spec.linear(ix, iy, iz)] = 1;
    }
  }
}

}  // namespace shapegrasp
