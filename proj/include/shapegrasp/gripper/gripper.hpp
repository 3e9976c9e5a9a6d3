#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapegrasp/geometry/bvh.hpp"
#include "shapegrasp/geometry/kdtree.hpp"
#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

// Parallel-jaw gripper. Gripper frame: +z is the approach axis, x the
// closing axis, origin at the palm base.
struct GripperModel {
  std::array<Vec3, 5> control_points;  // palm point, then two mirror pairs
  double max_opening = 0.08;
  double finger_depth = 0.046;
  std::vector<OrientedBox> collision_boxes;  // in the gripper frame
  int rays_per_finger = 3;

  static GripperModel default_model();

  // Throws kConfig when the model breaks its invariants.
  void validate() const;
  // Fingertip height along the approach axis.
  double tip_z() const;
  // Centre of the contact window between the fingers.
  Vec3 grasp_center() const { return Vec3(0.0, 0.0, tip_z() - 0.5 * finger_depth); }
};

// Plain-text key = value file. Recognised keys: max_opening, finger_depth,
// rays_per_finger, control_point (x y z, five lines, in order) and box
// (cx cy cz hx hy hz, axis-aligned in the gripper frame, repeatable).
// Missing keys keep their default values; control_point or box lines replace
// the whole default list.
GripperModel load_gripper_config(const std::string& path);
GripperModel parse_gripper_config(const std::string& text);

enum class Frame { kObject, kCamera, kWorld };
const char* to_string(Frame frame);

struct Grasp {
  Pose pose;
  Frame frame = Frame::kObject;
};

// Rotation by pi about the approach axis: swaps the fingers.
Grasp flip(const Grasp& g);

struct ContactPair {
  Vec3 c1 = Vec3::Zero();
  Vec3 c2 = Vec3::Zero();
  Vec3 n1 = Vec3::UnitX();
  Vec3 n2 = Vec3::UnitX();
};

using ControlPoints = Eigen::Matrix<double, 4, 5>;

// V stacks the homogeneous control points column-wise;
// V_flipped = diag(-1, -1, 1, 1) V.
std::pair<ControlPoints, ControlPoints> control_point_sets(const GripperModel& model);

struct AntipodalResult {
  bool valid = false;
  std::optional<ContactPair> contacts;
};

// Rays are cast inward along the closing axis from both finger planes at
// rays_per_finger heights inside the fingertip window. Per finger the hit
// nearest the grasp centre is the contact (ties keep the earlier ray, the
// window middle first). Valid iff both contacts exist, are at most
// max_opening apart and the contact line lies inside both friction cones.
AntipodalResult check_antipodal(const IndexedMesh& mesh, const Grasp& grasp, const GripperModel& model, double mu);
AntipodalResult check_antipodal(const TriMesh& mesh, const Grasp& grasp, const GripperModel& model, double mu);

// Collision boxes placed at the grasp pose and inflated by `clearance`.
std::vector<OrientedBox> placed_boxes(const Grasp& grasp, const GripperModel& model, double clearance);

// True if any inflated collision box touches a mesh triangle.
bool check_collision_mesh(const IndexedMesh& mesh, const Grasp& grasp, const GripperModel& model, double clearance);
bool check_collision_mesh(const TriMesh& mesh, const Grasp& grasp, const GripperModel& model, double clearance);

// True if any point lies in a closed inflated collision box.
bool check_collision_points(const PointCloud& cloud, const Grasp& grasp, const GripperModel& model, double clearance);
// Same verdict, with the cloud indexed for repeated queries.
bool check_collision_points(const KdTree& cloud, const Grasp& grasp, const GripperModel& model, double clearance);

}  // namespace shapegrasp
