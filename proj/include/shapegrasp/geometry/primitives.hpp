#pragma once

#include <utility>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

// All primitives are watertight, outward-wound and centred on their
// bounding box unless noted.

TriMesh make_box(const Vec3& size);
TriMesh make_icosphere(double radius, int subdivisions);

// Surface of revolution about z. `profile` holds (radius, z) pairs and must
// start and end on the axis (radius 0).
TriMesh make_revolved(const std::vector<std::pair<double, double>>& profile, int segments);

TriMesh make_cylinder(double radius, double height, int segments = 48);
TriMesh make_capsule(double radius, double height, int segments = 48, int cap_rings = 8);
// Open-top cup: outer radius, height, wall and bottom thickness.
TriMesh make_cup(double radius, double height, double wall, double bottom, int segments = 48);
TriMesh make_prism(int sides, double circumradius, double height);

}  // namespace shapegrasp
