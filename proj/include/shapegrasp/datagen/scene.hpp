#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapegrasp/datagen/library.hpp"
#include "shapegrasp/geometry/render.hpp"
#include "shapegrasp/latent.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

struct SceneObject {
  std::string object_id;
  Pose pose;  // object canonical frame -> world
};

// Table top is the plane z = 0; the workspace is centred on the origin.
struct SceneRecord {
  std::vector<SceneObject> objects;
  Vec3 workspace_min = Vec3(-0.15, -0.15, 0.0);
  Vec3 workspace_max = Vec3(0.15, 0.15, 0.3);
};

struct SceneParams {
  double poisson_mean = 4.0;
  int min_objects = 1;
  int max_objects = 6;
  int max_tries = 100;
  double workspace_size = 0.30;
};

// Object count: Poisson draw clipped to [min_objects, max_objects].
int sample_object_count(Rng& rng, const SceneParams& params);
// Expectation of the clipped count.
double clipped_poisson_mean(const SceneParams& params);

// Upright objects with uniform yaw and uniform xy (footprint kept inside
// the workspace), rejection-sampled against footprint-circle overlap.
SceneRecord make_packed_scene(const std::vector<ObjectRecord>& library, std::uint64_t seed,
                              const SceneParams& params = {});

struct SceneCamera {
  CameraIntrinsics intrinsics{300.0, 300.0, 160.0, 120.0, 320, 240};
  Pose pose = look_at(Vec3(0.0, -0.35, 0.5), Vec3(0.0, 0.0, 0.04));  // camera -> world
};

// Table slab under the workspace with its top face at z = 0.
const TriMesh& table_mesh();

// Renders the scene objects plus the table. Instance ids index
// scene.objects; table pixels have depth but instance kBackground.
RenderResult render_scene(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                          const SceneCamera& camera, const std::optional<DepthNoise>& noise = std::nullopt,
                          bool include_table = true);

// Per-pixel maps, row-major, channel-minor.
struct ImageLabels {
  int width = 0;
  int height = 0;
  std::vector<float> heatmap;         // 1 channel
  std::vector<float> pose_map;        // 12 channels, [R|t] row-major
  std::vector<float> code_map;        // kLatentDim channels
  std::vector<std::int32_t> instance_masks;
  std::vector<int> labelled_objects;  // scene indices that received labels

  std::size_t pixel(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
};

// Labels from an instance map. Objects without mask pixels are skipped
// with a warning. `camera_poses` and `codes` are indexed like the scene.
ImageLabels build_image_labels(std::span<const std::int32_t> instance, int width, int height,
                               std::span<const Pose> camera_poses, std::span<const LatentCode> codes);

// Heatmap centre pixel and covariance from a mask.
struct MaskGaussian {
  int u = 0;
  int v = 0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
};
MaskGaussian fit_mask_gaussian(std::span<const std::array<int, 2>> pixels);

struct LabelledImage {
  DepthImage depth;
  ImageLabels labels;
};

LabelledImage render_labels(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                            const SceneCamera& camera, const std::map<std::string, LatentCode>& code_lookup,
                            const std::optional<DepthNoise>& noise = std::nullopt);

// Object pose in the camera frame.
Pose camera_frame_pose(const SceneCamera& camera, const Pose& world_pose);

}  // namespace shapegrasp
