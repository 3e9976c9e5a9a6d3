#include "shapegrasp/datagen/labels.hpp"

#include <cmath>
#include <limits>

#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/kdtree.hpp"
#include "shapegrasp/geometry/sampling.hpp"
#include "shapegrasp/geometry/sdf.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

std::vector<Grasp> generate_candidates(const TriMesh& mesh, const GripperModel& gripper, std::size_t n_points,
                                       std::size_t n_rotations, std::uint64_t seed) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot generate grasps on an empty mesh");
  if (!mesh.watertight) throw Error(ErrorCode::kSdfUndefined, "grasp generation needs a watertight mesh");
  if (n_rotations == 0) throw Error(ErrorCode::kInvalidArgument, "n_rotations must be positive");
  const PointCloud surface = sample_surface(mesh, n_points, derive_seed(seed, "candidates"));

  std::vector<Grasp> out;
  out.reserve(n_points * n_rotations);
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const Vec3 approach = -surface.normals[i];
    const Vec3 ref = std::abs(approach.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
    const Vec3 x = (ref - ref.dot(approach) * approach).normalized();
    Mat3 base;
    base.col(0) = x;
    base.col(1) = approach.cross(x);
    base.col(2) = approach;
    const Vec3 origin = snap_to_label_lattice(surface.points[i] - gripper.finger_depth * approach);
    for (std::size_t k = 0; k < n_rotations; ++k) {
      const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n_rotations);
      Grasp g;
      g.frame = Frame::kObject;
      g.pose.rotation = canonical_rotation(base * rot_z(angle));
      g.pose.translation = origin;
      out.push_back(g);
    }
  }
  return out;
}

GraspSet label_valid_grasps(const IndexedMesh& mesh, const std::vector<Grasp>& candidates,
                            const GripperModel& gripper, const GraspProvenance& provenance,
                            const std::string& object_id) {
  GraspSet set;
  set.object_id = object_id;
  set.provenance = provenance;
  for (const auto& g : candidates) {
    if (!check_antipodal(mesh, g, gripper, provenance.mu).valid) continue;
    if (check_collision_mesh(mesh, g, gripper, provenance.clearance)) continue;
    set.grasps.push_back(g);
  }
  if (set.grasps.empty()) warn("no valid grasps for object '" + object_id + "'");
  return set;
}

Vec3 snap_to_label_lattice(const Vec3& p) {
  return p.unaryExpr([](double v) { return std::ldexp(std::round(std::ldexp(v, 32)), -32); });
}

Vec3 exact_offset(const Vec3& x, const Vec3& target) {
  Vec3 d = target - x;
  for (int a = 0; a < 3; ++a) {
    for (int step = 0; x[a] + d[a] != target[a]; ++step) {
      if (step > 64) throw Error(ErrorCode::kInvalidArgument, "no exact offset representable");
      d[a] = std::nextafter(d[a], x[a] + d[a] < target[a] ? std::numeric_limits<double>::infinity()
                                                           : -std::numeric_limits<double>::infinity());
    }
  }
  return d;
}

std::vector<SgdfSample> sample_sgdf(const IndexedMesh& mesh, const GraspSet& grasps, std::size_t n_samples,
                                    std::uint64_t seed, const SdfSamplingParams& params) {
  if (grasps.grasps.empty()) throw Error(ErrorCode::kNoGrasps, "sample_sgdf needs a non-empty grasp set");
  if (n_samples == 0) return {};

  const auto n_near = static_cast<std::size_t>(std::llround(params.near_fraction * static_cast<double>(n_samples)));
  std::vector<Vec3> points;
  points.reserve(n_samples);
  Rng rng(derive_seed(seed, "sgdf-points"));
  if (n_near > 0) {
    const PointCloud surface = sample_surface(mesh.mesh(), n_near, derive_seed(seed, "sgdf-surface"));
    std::normal_distribution<double> gauss(0.0, params.near_sigma);
    for (const auto& p : surface.points) {
      const double dx = gauss(rng), dy = gauss(rng), dz = gauss(rng);
      points.push_back(p + Vec3(dx, dy, dz));
    }
  }
  const Box3 box = mesh.mesh().bounds();
  const Vec3 half = 0.5 * params.box_scale * box.sizes();
  const Vec3 center = box.center();
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  while (points.size() < n_samples) {
    const double ux = uniform(rng), uy = uniform(rng), uz = uniform(rng);
    points.push_back(center + Vec3(ux * half.x(), uy * half.y(), uz * half.z()));
  }

  return label_points(mesh, grasps, points);
}

std::vector<SgdfSample> label_points(const IndexedMesh& mesh, const GraspSet& grasps, std::span<const Vec3> points) {
  if (grasps.grasps.empty()) throw Error(ErrorCode::kNoGrasps, "labelling needs a non-empty grasp set");
  std::vector<Vec3> translations;
  translations.reserve(grasps.grasps.size());
  for (const auto& g : grasps.grasps) translations.push_back(g.pose.translation);
  const KdTree tree(translations);
  std::vector<SgdfSample> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i].x = snap_to_label_lattice(points[i]);
    const Grasp& g = grasps.grasps[tree.nearest(out[i].x).index];
    out[i].s = mesh_sdf(mesh, out[i].x);
    out[i].delta_t = exact_offset(out[i].x, g.pose.translation);
    out[i].rotation = g.pose.rotation;
  }
  return out;
}

}  // namespace shapegrasp
