#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shapegrasp/geometry/kdtree.hpp"
#include "shapegrasp/geometry/render.hpp"
#include "shapegrasp/gripper/gripper.hpp"
#include "shapegrasp/percept/percept.hpp"
#include "shapegrasp/sgdf/decoder.hpp"

namespace shapegrasp {

// Dense evaluation grid in the canonical object frame. Grid points include
// both bounds, so spacing = extent / (resolution - 1).
struct GridSpec {
  int resolution = 64;
  Box3 bounds = Box3(Vec3::Constant(-0.07), Vec3::Constant(0.07));
  double epsilon = -1.0;  // iso band half-width; negative means half the spacing

  void validate() const;
  Vec3 spacing() const;
  double band() const;
  Vec3 point(int i, int j, int k) const;
  std::size_t point_count() const;
};

struct DedupParams {
  double translation = 0.005;  // meters
  double rotation = 10.0 * 3.14159265358979323846 / 180.0;  // radians
};

struct ReconstructedObject {
  PointCloud surface_points;  // canonical frame
  std::vector<Grasp> grasps;  // canonical frame, deduplicated
  Vec3 centroid = Vec3::Zero();
  Pose pose;  // camera frame once placed
  std::size_t band_points = 0;  // grid points with |s| <= epsilon
  bool has_grasps() const { return !grasps.empty(); }
};

// Greedy suppression in input order: a grasp is dropped when a kept grasp
// lies within the translation bound and within the rotation bound, the
// finger-swapped pose counting as the same grasp.
std::vector<Grasp> dedup_grasps(const std::vector<Grasp>& grasps, const DedupParams& params = {});

// Evaluates the decoder on every grid point and keeps the |s| <= epsilon
// band; band grasps are visited by increasing |s| before deduplication.
// Throws kEmptyReconstruction when the band is empty.
ReconstructedObject decode_object(const SgdfDecoder& decoder, const LatentCode& code, const GridSpec& grid = {},
                                  const DedupParams& dedup = {});

// Memoised decode_object keyed on the exact code bits.
class DecodeCache {
 public:
  DecodeCache(const SgdfDecoder& decoder, GridSpec grid = {}, DedupParams dedup = {});
  std::shared_ptr<const ReconstructedObject> get(const LatentCode& code);
  std::size_t size() const { return cache_.size(); }

 private:
  const SgdfDecoder* decoder_;
  GridSpec grid_;
  DedupParams dedup_;
  std::map<std::vector<double>, std::shared_ptr<const ReconstructedObject>> cache_;
};

// k-nearest-neighbour plane fits, normals oriented towards `viewpoint`.
void estimate_normals(PointCloud& cloud, const Vec3& viewpoint = Vec3::Zero(), int k = 10);

struct IcpParams {
  int max_iterations = 30;
  double initial_cutoff = 0.02;
  double cutoff_decay = 0.9;
  double min_cutoff = 0.005;
  double tolerance = 1e-5;  // on the norm of the (rotation, translation) update
  std::size_t min_correspondences = 10;
};

struct IcpResult {
  Pose pose;
  double residual = 0.0;  // RMS point-to-plane distance of the final correspondences, meters
  int iterations = 0;
  std::size_t correspondences = 0;
};

// Point-to-plane ICP aligning `model` (model frame) to `observed` (target
// frame, with normals) from `init`. Throws kTooFewCorrespondences when fewer
// than min_correspondences pairs fall inside the cutoff.
IcpResult refine_pose_icp(const PointCloud& model, const PointCloud& observed, const Pose& init,
                          const IcpParams& params = {});
IcpResult refine_pose_icp(const PointCloud& model, const PointCloud& observed, const KdTree& observed_tree,
                          const Pose& init, const IcpParams& params = {});

// Grasps free of the scene points at the given clearance, order preserved.
std::vector<Grasp> filter_grasps(const std::vector<Grasp>& grasps, const KdTree& scene, const GripperModel& gripper,
                                 double clearance);
std::vector<Grasp> filter_grasps(const std::vector<Grasp>& grasps, const PointCloud& scene,
                                 const GripperModel& gripper, double clearance);

struct GraspChoice {
  Grasp grasp;
  std::size_t index = 0;
  double torque = 0.0;
};

// argmin of |(centroid - t) x gravity_dir| over the grasps, first on ties.
// Throws kEmptyList for an empty list.
GraspChoice select_grasp(const std::vector<Grasp>& grasps, const Vec3& centroid, const Vec3& gravity_dir);

// Depth image, intrinsics and the back-projected cloud with normals, all in
// the camera frame.
struct SceneObservation {
  DepthImage depth;
  CameraIntrinsics intrinsics;
  PointCloud cloud;
  KdTree tree;
};

SceneObservation make_observation(const DepthImage& depth, const CameraIntrinsics& intrinsics);

struct PlanParams {
  double clearance = 0.005;
  Vec3 gravity = Vec3(0.0, 0.0, -1.0);  // camera frame
  bool refine = true;
  IcpParams icp;
  double visibility_tolerance = 0.01;  // model points behind the observed depth by more are hidden
};

struct PlannedObject {
  std::size_t detection = 0;
  Pose initial_pose;
  Pose pose;  // after refinement
  bool icp_ok = false;
  double icp_residual = 0.0;
  std::string icp_message;
  Vec3 centroid = Vec3::Zero();  // camera frame
  std::size_t decoded = 0;
  std::size_t survivors = 0;
  std::optional<GraspChoice> choice;  // camera frame
  std::shared_ptr<const ReconstructedObject> shape;
  std::string message;
};

struct PlanResult {
  std::vector<PlannedObject> objects;  // one per detection, detection order
  std::vector<std::size_t> ranking;    // objects with a grasp, by increasing torque
  std::size_t decoded = 0;
  std::size_t survivors = 0;
  std::size_t selected = 0;
};

PlanResult plan(const std::vector<Detection>& detections, DecodeCache& cache, const SceneObservation& observation,
                const GripperModel& gripper, const PlanParams& params = {});

// Poses as 12 floats, row-major [R|t].
std::string plan_to_json(const PlanResult& result);
// Surface points of every object in the camera frame plus each selected
// grasp as coloured segments along its axes.
void write_plan_ply(const std::string& path, const PlanResult& result);

}  // namespace shapegrasp
