#include "shapegrasp/datagen/library.hpp"

#include <algorithm>

#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/primitives.hpp"

namespace shapegrasp {

ObjectRecord make_object_record(std::string id, TriMesh mesh) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "object '" + id + "' has an empty mesh");
  ObjectRecord r;
  r.id = std::move(id);
  for (const auto& v : mesh.vertices) r.footprint_radius = std::max(r.footprint_radius, v.head<2>().norm());
  r.min_z = mesh.bounds().min().z();
  r.mesh = std::move(mesh);
  return r;
}

TriMesh center_on_bounds(const TriMesh& mesh) {
  return mesh.transformed(make_transform(-mesh.bounds().center(), Mat3::Identity()));
}

std::vector<std::string> builtin_object_ids() {
  return {"box_tall", "box_square", "box_slab", "cylinder_thin", "cylinder_wide", "capsule", "cup", "hex_prism"};
}

ObjectRecord builtin_object(const std::string& id) {
  if (id == "box_tall") return make_object_record(id, make_box(Vec3(0.05, 0.04, 0.09)));
  if (id == "box_square") return make_object_record(id, make_box(Vec3(0.055, 0.055, 0.085)));
  if (id == "box_slab") return make_object_record(id, make_box(Vec3(0.065, 0.03, 0.08)));
  if (id == "cylinder_thin") return make_object_record(id, make_cylinder(0.02, 0.09));
  if (id == "cylinder_wide") return make_object_record(id, make_cylinder(0.027, 0.085));
  if (id == "capsule") return make_object_record(id, make_capsule(0.022, 0.09));
  if (id == "cup") return make_object_record(id, make_cup(0.035, 0.09, 0.008, 0.008));
  if (id == "hex_prism") return make_object_record(id, make_prism(6, 0.028, 0.085));
  throw Error(ErrorCode::kConfig, "unknown built-in object '" + id + "'");
}

std::vector<ObjectRecord> builtin_library() {
  std::vector<ObjectRecord> out;
  for (const auto& id : builtin_object_ids()) out.push_back(builtin_object(id));
  return out;
}

const ObjectRecord& find_object(const std::vector<ObjectRecord>& library, const std::string& id) {
  for (const auto& o : library) {
    if (o.id == id) return o;
  }
  throw Error(ErrorCode::kInvalidArgument, "object '" + id + "' not in library");
}

}  // namespace shapegrasp
