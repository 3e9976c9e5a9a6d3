#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapegrasp/datagen/scene.hpp"
#include "shapegrasp/geometry/bvh.hpp"
#include "shapegrasp/gripper/gripper.hpp"

namespace shapegrasp {

// 1000 x (mean_a min_b |a - b| + mean_b min_a |a - b|), in millimetres.
// Throws kEmptyCloud when either cloud is empty.
double chamfer(const PointCloud& a, const PointCloud& b);
// Exhaustive O(|A| |B|) reference with the same summation order.
double chamfer_brute_force(const PointCloud& a, const PointCloud& b);

inline constexpr double kIouSpacing = 0.005;

// Solid IoU: both clouds voxelized over their joint bounds, each column
// filled between its lowest and highest occupied cell along z.
// Throws kEmptyUnion when no cell is occupied.
double iou3d(const PointCloud& a, const PointCloud& b, double spacing = kIouSpacing);

inline constexpr double kSuccessMu = 0.8;
inline constexpr double kSuccessClearance = 0.003;

// Grasp and mesh pose in the same frame; the mesh is given in its own frame.
// Antipodal at mu and free of the mesh at the clearance.
bool analytic_success(const IndexedMesh& mesh, const Pose& pose, const Grasp& grasp, const GripperModel& gripper,
                      double mu = kSuccessMu, double clearance = kSuccessClearance);
bool analytic_success(const TriMesh& mesh, const Pose& pose, const Grasp& grasp, const GripperModel& gripper,
                      double mu = kSuccessMu, double clearance = kSuccessClearance);

enum class Termination { kCleared, kThreeConsecutiveFailures, kNoGraspPredicted };
const char* to_string(Termination t);

struct Attempt {
  int object = -1;  // index into the original scene, -1 when no object is near the grasp
  Grasp grasp;      // world frame
  bool success = false;
  std::string failure;  // empty on success
};

struct EpisodeLog {
  std::string scene_id;
  std::size_t n_objects = 0;
  std::vector<Attempt> attempts;
  Termination termination = Termination::kCleared;

  std::size_t successes() const;
};

// Ranked camera-frame grasps for the remaining scene, given its rendering.
using Planner = std::function<std::vector<Grasp>(const SceneRecord& remaining, const RenderResult& observation)>;

struct EpisodeParams {
  double mu = kSuccessMu;
  double clearance = kSuccessClearance;
  int max_consecutive_failures = 3;
  int max_failures_per_object = 2;
  std::optional<DepthNoise> depth_noise;
};

// Repeats render, plan and attempt on the remaining objects. The attempt
// targets the remaining object nearest to the grasp centre; it succeeds when
// the grasp passes analytic_success on that object and touches neither the
// other remaining objects nor the table. An object with two failures is
// excluded from later attempts, and grasps targeting it are skipped.
EpisodeLog run_episode(const SceneRecord& scene, const std::vector<ObjectRecord>& library, const Planner& planner,
                       const SceneCamera& camera, const GripperModel& gripper, const EpisodeParams& params = {},
                       const std::string& scene_id = "");

struct Rates {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::size_t objects = 0;
  std::optional<double> success_rate;  // undefined without attempts
  double declutter_rate = 0.0;
};

// Throws kInvalidArgument when total_objects is zero.
Rates aggregate(const std::vector<EpisodeLog>& logs, std::size_t total_objects);

inline constexpr int kQualityTopK = 50;

// Simplified AP: per mu, the fraction of the first min(k, n) grasps passing
// analytic_success. Throws kEmptyList for an empty list.
std::map<double, double> quality_sweep(const std::vector<Grasp>& ranked, const IndexedMesh& mesh, const Pose& pose,
                                       const std::vector<double>& mu_list, const GripperModel& gripper,
                                       int k = kQualityTopK, double clearance = kSuccessClearance);

struct MetricReport {
  std::string environment;
  std::optional<double> chamfer_mm;
  std::optional<double> iou;
  std::optional<double> success_rate;
  std::optional<double> declutter_rate;
  std::map<double, double> ap_per_mu;
};

std::string report_to_json(const std::vector<MetricReport>& reports);
// Aligned columns: environment, CD, IoU, SR, DR, then one simplified-AP
// column per mu.
std::string report_to_text(const std::vector<MetricReport>& reports);

}  // namespace shapegrasp
