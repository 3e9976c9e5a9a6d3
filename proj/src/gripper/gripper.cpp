#include "shapegrasp/gripper/gripper.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

OrientedBox axis_box(const Vec3& center, const Vec3& half) {
  OrientedBox b;
  b.pose.translation = center;
  b.half_extents = half;
  return b;
}

bool inside_box(const OrientedBox& box, const Vec3& p) {
  const Vec3 local = box.pose.rotation.transpose() * (p - box.pose.translation);
  return (local.array().abs() <= box.half_extents.array()).all();
}

Vec3 read_vec3(std::istringstream& ss, const std::string& key) {
  Vec3 v;
  ss >> v.x() >> v.y() >> v.z();
  if (!ss) throw Error(ErrorCode::kConfig, "gripper config: malformed value for " + key);
  return v;
}

double read_number(std::istringstream& ss, const std::string& key) {
  double v = 0.0;
  ss >> v;
  if (!ss) throw Error(ErrorCode::kConfig, "gripper config: malformed value for " + key);
  return v;
}

struct FingerHit {
  Vec3 point;
  Vec3 normal;
};

}  // namespace

GripperModel GripperModel::default_model() {
  GripperModel m;
  m.control_points = {Vec3(0.0, 0.0, 0.0), Vec3(0.041, 0.0, 0.066), Vec3(-0.041, 0.0, 0.066),
                      Vec3(0.041, 0.0, 0.112), Vec3(-0.041, 0.0, 0.112)};
  m.max_opening = 0.08;
  m.finger_depth = 0.046;
  // Palm slab below the finger bases, and one box per finger whose inner
  // face sits on the open-jaw plane x = +-max_opening / 2.
  m.collision_boxes = {axis_box(Vec3(0.0, 0.0, 0.015), Vec3(0.05, 0.012, 0.015)),
                       axis_box(Vec3(0.045, 0.0, 0.071), Vec3(0.005, 0.01, 0.041)),
                       axis_box(Vec3(-0.045, 0.0, 0.071), Vec3(0.005, 0.01, 0.041))};
  return m;
}

double GripperModel::tip_z() const {
  double z = control_points[0].z();
  for (const auto& p : control_points) z = std::max(z, p.z());
  return z;
}

void GripperModel::validate() const {
  if (!(max_opening > 0.0) || !(finger_depth > 0.0))
    throw Error(ErrorCode::kConfig, "gripper max_opening and finger_depth must be positive");
  if (rays_per_finger < 1) throw Error(ErrorCode::kConfig, "gripper rays_per_finger must be >= 1");
  for (const auto& b : collision_boxes) {
    if (!(b.half_extents.array() > 0.0).all()) throw Error(ErrorCode::kConfig, "gripper box extents must be positive");
    if (!is_rotation(b.pose.rotation)) throw Error(ErrorCode::kConfig, "gripper box rotation invalid");
  }
  // diag(-1,-1,1) must map the control point set onto itself.
  for (const auto& p : control_points) {
    const Vec3 q(-p.x(), -p.y(), p.z());
    bool found = false;
    for (const auto& other : control_points) found = found || (other - q).norm() <= 1e-12;
    if (!found) throw Error(ErrorCode::kConfig, "gripper control points are not flip symmetric");
  }
}

GripperModel parse_gripper_config(const std::string& text) {
  GripperModel m = GripperModel::default_model();
  std::vector<Vec3> points;
  std::vector<OrientedBox> boxes;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(ErrorCode::kConfig, "gripper config: expected key = value, got '" + line + "'");
      continue;
    }
    std::istringstream key_ss(line.substr(0, eq));
    std::string key;
    key_ss >> key;
    std::istringstream ss(line.substr(eq + 1));
    if (key == "max_opening") {
      m.max_opening = read_number(ss, key);
    } else if (key == "finger_depth") {
      m.finger_depth = read_number(ss, key);
    } else if (key == "rays_per_finger") {
      m.rays_per_finger = static_cast<int>(read_number(ss, key));
    } else if (key == "control_point") {
      points.push_back(read_vec3(ss, key));
    } else if (key == "box") {
      const Vec3 c = read_vec3(ss, key);
      const Vec3 h = read_vec3(ss, key);
      boxes.push_back(axis_box(c, h));
    } else {
      throw Error(ErrorCode::kConfig, "gripper config: unknown key " + key);
    }
  }
  if (!points.empty()) {
    if (points.size() != 5) throw Error(ErrorCode::kConfig, "gripper config needs exactly 5 control points");
    std::copy(points.begin(), points.end(), m.control_points.begin());
  }
  if (!boxes.empty()) m.collision_boxes = boxes;
  m.validate();
  return m;
}

GripperModel load_gripper_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open gripper config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_gripper_config(buf.str());
}

const char* to_string(Frame frame) {
  switch (frame) {
    case Frame::kObject: return "object";
    case Frame::kCamera: return "camera";
    case Frame::kWorld: return "world";
  }
  return "unknown";
}

Grasp flip(const Grasp& g) {
  Mat3 rz = Mat3::Identity();
  rz(0, 0) = -1.0;
  rz(1, 1) = -1.0;
  Grasp out = g;
  out.pose.rotation = g.pose.rotation * rz;
  return out;
}

std::pair<ControlPoints, ControlPoints> control_point_sets(const GripperModel& model) {
  ControlPoints v;
  for (int i = 0; i < 5; ++i) v.col(i) << model.control_points[i], 1.0;
  const ControlPoints flipped = Eigen::Vector4d(-1.0, -1.0, 1.0, 1.0).asDiagonal() * v;
  return {v, flipped};
}

AntipodalResult check_antipodal(const IndexedMesh& mesh, const Grasp& grasp, const GripperModel& model, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::kInvalidArgument, "friction coefficient must be positive");
  const Mat3& r = grasp.pose.rotation;
  const Vec3 closing = r.col(0);
  const Vec3 center = grasp.pose.apply(model.grasp_center());
  const double half = 0.5 * model.max_opening;
  const double z_lo = model.tip_z() - model.finger_depth;

  // Window fractions: middle first, then alternating outward.
  std::vector<double> fractions;
  const int n = model.rays_per_finger;
  for (int i = 0; i < n; ++i) {
    const int k = (i + 1) / 2;
    const double step = 0.5 / ((n + 1) / 2);
    fractions.push_back(i == 0 ? 0.5 : (i % 2 ? 0.5 - k * step : 0.5 + k * step));
  }

  auto finger_contact = [&](double side) -> std::optional<FingerHit> {
    // side = -1: finger at -x closing along +x; side = +1 the mirror.
    const Vec3 dir = -side * closing;
    std::optional<FingerHit> best;
    double best_d = 0.0;
    for (double f : fractions) {
      const Vec3 origin = grasp.pose.apply(Vec3(side * half, 0.0, z_lo + f * model.finger_depth));
      const auto hit = mesh.first_hit(origin, dir, 0.0, model.max_opening);
      if (!hit) continue;
      const Vec3 p = origin + hit->t * dir;
      const double d = (p - center).norm();
      if (!best || d < best_d - 1e-9) {
        best = FingerHit{p, mesh.mesh().normals[hit->triangle]};
        best_d = d;
      }
    }
    return best;
  };

  const auto h1 = finger_contact(-1.0);
  const auto h2 = finger_contact(1.0);
  AntipodalResult out;
  if (!h1 || !h2) return out;
  out.contacts = ContactPair{h1->point, h2->point, h1->normal, h2->normal};
  const Vec3 line = h2->point - h1->point;
  const double sep = line.norm();
  if (sep > model.max_opening || sep <= 1e-12) return out;
  const Vec3 d = line / sep;
  // Angle between the squeeze direction and each inward normal, compared
  // through the cosine to avoid acos at the cone boundary.
  const double cos_cone = 1.0 / std::sqrt(1.0 + mu * mu);
  out.valid = d.dot(-h1->normal) >= cos_cone && (-d).dot(-h2->normal) >= cos_cone;
  return out;
}

AntipodalResult check_antipodal(const TriMesh& mesh, const Grasp& grasp, const GripperModel& model, double mu) {
  return check_antipodal(IndexedMesh(mesh), grasp, model, mu);
}

std::vector<OrientedBox> placed_boxes(const Grasp& grasp, const GripperModel& model, double clearance) {
  std::vector<OrientedBox> out;
  out.reserve(model.collision_boxes.size());
  for (const auto& b : model.collision_boxes) {
    out.push_back(OrientedBox{grasp.pose * b.pose, b.half_extents + Vec3::Constant(clearance)});
  }
  return out;
}

bool check_collision_mesh(const IndexedMesh& mesh, const Grasp& grasp, const GripperModel& model, double clearance) {
  for (const auto& b : placed_boxes(grasp, model, clearance)) {
    if (mesh.overlaps_box(b)) return true;
  }
  return false;
}

bool check_collision_mesh(const TriMesh& mesh, const Grasp& grasp, const GripperModel& model, double clearance) {
  return check_collision_mesh(IndexedMesh(mesh), grasp, model, clearance);
}

bool check_collision_points(const PointCloud& cloud, const Grasp& grasp, const GripperModel& model, double clearance) {
  const auto boxes = placed_boxes(grasp, model, clearance);
  for (const auto& p : cloud.points) {
    for (const auto& b : boxes) {
      if (inside_box(b, p)) return true;
    }
  }
  return false;
}

bool check_collision_points(const KdTree& cloud, const Grasp& grasp, const GripperModel& model, double clearance) {
  if (cloud.empty()) return false;
  for (const auto& b : placed_boxes(grasp, model, clearance)) {
    for (auto i : cloud.radius(b.pose.translation, b.half_extents.norm())) {
      if (inside_box(b, cloud.point(i))) return true;
    }
  }
  return false;
}

}  // namespace shapegrasp
