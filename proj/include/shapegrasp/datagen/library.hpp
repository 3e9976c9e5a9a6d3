#pragma once

#include <string>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

// A graspable object in its canonical frame: z up, centred on its bounding
// box, resting on z = min_z when placed upright.
struct ObjectRecord {
  std::string id;
  TriMesh mesh;
  double footprint_radius = 0.0;  // max xy distance of any vertex from the z axis
  double min_z = 0.0;
};

ObjectRecord make_object_record(std::string id, TriMesh mesh);

// Recentres a loaded mesh on its bounding box centre.
TriMesh center_on_bounds(const TriMesh& mesh);

// The built-in desk-scale library of eight procedural primitives.
std::vector<ObjectRecord> builtin_library();
std::vector<std::string> builtin_object_ids();
ObjectRecord builtin_object(const std::string& id);

const ObjectRecord& find_object(const std::vector<ObjectRecord>& library, const std::string& id);

}  // namespace shapegrasp
