#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapegrasp/datagen/dataset_io.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/datagen/scene.hpp"
#include "shapegrasp/eval/eval.hpp"
#include "shapegrasp/pipeline/pipeline.hpp"
#include "shapegrasp/sgdf/checkpoint.hpp"
#include "shapegrasp/sgdf/training.hpp"

namespace shapegrasp {

struct MeshEntry {
  std::string id;
  std::string path;
};

struct GenSettings {
  std::size_t n_surface_points = 1000;
  std::size_t n_rotations = 24;
  double mu = 0.5;
  double clearance = 0.003;
  std::size_t n_samples = 100000;
};

struct EvalSettings {
  std::size_t n_scenes = 50;
  std::uint64_t scene_seed = 7;
  double mu = kSuccessMu;
  double clearance = kSuccessClearance;
  std::vector<double> ap_mu = {0.4, 0.8};
  std::size_t reference_points = 20000;  // ground-truth surface samples for CD and IoU
};

// Plain JSON run configuration. Every key is optional:
//   seed, dataset, checkpoint, output, gripper, scene,
//   objects: [builtin ids], meshes: [{id, path}],
//   gen: {n_surface_points, n_rotations, mu, clearance, n_samples},
//   train: {epochs, learning_rate, batch_size, clamp, latent_dim, hidden_layers, width, skip_layer, dropout,
//           coord_scale, weight_sdf, weight_grasp, weight_code},
//   grid: {resolution, min: [x, y, z], max: [x, y, z], epsilon},
//   camera: {fx, fy, cx, cy, width, height, eye: [x, y, z], target: [x, y, z]},
//   noise: {sigma_trans, sigma_rot, sigma_code, depth_sigma},
//   plan: {clearance, refine},
//   eval: {n_scenes, scene_seed, mu, clearance, ap_mu: [..], reference_points}
struct RunConfig {
  std::uint64_t seed = 0;
  std::string dataset = "dataset";
  std::string checkpoint = "model.sgdf";
  std::string output = "out";
  std::string gripper;  // empty: built-in model
  std::string scene;    // scene JSON for plan; empty: a packed scene from the seed
  std::vector<std::string> objects;  // built-in ids; empty with no meshes: the whole built-in library
  std::vector<MeshEntry> meshes;
  GenSettings gen;
  TrainConfig train;
  GridSpec grid;
  SceneCamera camera;
  OracleNoise noise;
  double depth_sigma = 0.0;
  PlanParams plan;
  EvalSettings eval;

  GripperModel gripper_model() const;
};

// Throws kConfig on malformed JSON, unknown keys or invalid values.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Objects named by the configuration. Throws kIo for a missing mesh file.
std::vector<ObjectRecord> resolve_objects(const RunConfig& config);
// Objects stored in a dataset directory.
std::vector<ObjectRecord> load_dataset_library(const std::string& dir, const DatasetManifest& manifest);

// Scene file: {"objects": [{"id": ..., "pose": [12 floats, row-major [R|t]]}]}.
SceneRecord load_scene(const std::string& path);
void save_scene(const std::string& path, const SceneRecord& scene);

// Camera-frame gravity for a world -z pull.
Vec3 camera_gravity(const SceneCamera& camera);

// Oracle-encoder perception followed by plan; grasps ranked by torque.
struct OraclePlanner {
  const std::vector<ObjectRecord>* library = nullptr;
  std::map<std::string, LatentCode> codes;
  DecodeCache* cache = nullptr;
  SceneCamera camera;
  GripperModel gripper;
  OracleNoise noise;
  PlanParams params;

  PlanResult plan_scene(const SceneRecord& scene, const RenderResult& observation) const;
  std::vector<Grasp> operator()(const SceneRecord& scene, const RenderResult& observation) const;
};

std::map<std::string, LatentCode> code_lookup(const LatentTable& table);

// Commands. Messages go to `log`; errors propagate as Error.
DatasetManifest cmd_gen(const RunConfig& config, std::ostream& log);
TrainResult cmd_train(const RunConfig& config, std::ostream& log);
PlanResult cmd_plan(const RunConfig& config, std::ostream& log);
std::vector<MetricReport> cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_export_mesh(const RunConfig& config, const std::string& object_id, const std::string& path,
                     std::ostream& log);
void cmd_inspect(const std::string& path, std::ostream& out);

// 2 for configuration and I/O errors, 1 otherwise.
int exit_code_for(const Error& e);

}  // namespace shapegrasp
