#include "shapegrasp/datagen/scene.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/primitives.hpp"

namespace shapegrasp {

int sample_object_count(Rng& rng, const SceneParams& params) {
  std::poisson_distribution<int> poisson(params.poisson_mean);
  return std::clamp(poisson(rng), params.min_objects, params.max_objects);
}

double clipped_poisson_mean(const SceneParams& params) {
  // P(k) by recurrence; everything at or above max_objects collapses onto it.
  double p = std::exp(-params.poisson_mean);
  double below = 0.0, mean = 0.0;
  for (int k = 0; k < params.max_objects; ++k) {
    mean += std::max(k, params.min_objects) * p;
    below += p;
    p *= params.poisson_mean / (k + 1);
  }
  return mean + params.max_objects * (1.0 - below);
}

SceneRecord make_packed_scene(const std::vector<ObjectRecord>& library, std::uint64_t seed,
                              const SceneParams& params) {
  if (library.empty()) throw Error(ErrorCode::kInvalidArgument, "scene generation needs a non-empty library");
  Rng rng(derive_seed(seed, "packed-scene"));
  SceneRecord scene;
  const double half = 0.5 * params.workspace_size;
  scene.workspace_min = Vec3(-half, -half, 0.0);
  scene.workspace_max = Vec3(half, half, 0.3);

  const int count = sample_object_count(rng, params);
  std::uniform_int_distribution<std::size_t> pick(0, library.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> radii;
  for (int i = 0; i < count; ++i) {
    const ObjectRecord& obj = library[pick(rng)];
    const double r = obj.footprint_radius;
    const double range = std::max(0.0, half - r);
    for (int attempt = 0; attempt < params.max_tries; ++attempt) {
      const double yaw = 2.0 * M_PI * unit(rng);
      const double x = (2.0 * unit(rng) - 1.0) * range;
      const double y = (2.0 * unit(rng) - 1.0) * range;
      bool free = true;
      for (std::size_t j = 0; j < scene.objects.size() && free; ++j) {
        const Vec3& other = scene.objects[j].pose.translation;
        free = std::hypot(other.x() - x, other.y() - y) >= r + radii[j];
      }
      if (!free) continue;
      scene.objects.push_back(SceneObject{obj.id, make_transform(Vec3(x, y, -obj.min_z), rot_z(yaw))});
      radii.push_back(r);
      break;
    }
  }
  return scene;
}

const TriMesh& table_mesh() {
  static const TriMesh table =
      make_box(Vec3(0.6, 0.6, 0.02)).transformed(make_transform(Vec3(0.0, 0.0, -0.01), Mat3::Identity()));
  return table;
}

RenderResult render_scene(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                          const SceneCamera& camera, const std::optional<DepthNoise>& noise, bool include_table) {
  std::vector<MeshInstance> instances;
  for (const auto& o : scene.objects) instances.push_back({&find_object(library, o.object_id).mesh, o.pose});
  const auto n_objects = static_cast<std::int32_t>(instances.size());
  if (include_table) instances.push_back({&table_mesh(), Pose::identity()});
  if (instances.empty()) {
    RenderResult empty;
    empty.depth.width = camera.intrinsics.width;
    empty.depth.height = camera.intrinsics.height;
    empty.depth.depth.assign(static_cast<std::size_t>(camera.intrinsics.width) * camera.intrinsics.height, kNoDepth);
    empty.instance.assign(empty.depth.depth.size(), kBackground);
    return empty;
  }
  RenderResult r = render_depth(instances, camera.intrinsics, camera.pose, noise);
  for (auto& id : r.instance) {
    if (id == n_objects) id = kBackground;
  }
  return r;
}

Pose camera_frame_pose(const SceneCamera& camera, const Pose& world_pose) {
  return camera.pose.inverse() * world_pose;
}

MaskGaussian fit_mask_gaussian(std::span<const std::array<int, 2>> pixels) {
  if (pixels.empty()) throw Error(ErrorCode::kInvalidArgument, "empty mask");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pixels) mean += Eigen::Vector2d(p[0], p[1]);
  mean /= static_cast<double>(pixels.size());
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  for (const auto& p : pixels) {
    const Eigen::Vector2d d = Eigen::Vector2d(p[0], p[1]) - mean;
    second += d * d.transpose();
  }
  second /= static_cast<double>(pixels.size());

  MaskGaussian g;
  // Peak on the mask pixel closest to the centroid, so concave masks still
  // put their maximum on the object.
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pixels) {
    const double d = (Eigen::Vector2d(p[0], p[1]) - mean).squaredNorm();
    if (d < best) {
      best = d;
      g.u = p[0];
      g.v = p[1];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(second / 4.0);
  const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(4.0);  // 2 px std floor
  g.covariance = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return g;
}

ImageLabels build_image_labels(std::span<const std::int32_t> instance, int width, int height,
                               std::span<const Pose> camera_poses, std::span<const LatentCode> codes) {
  if (camera_poses.size() != codes.size())
    throw Error(ErrorCode::kDimensionMismatch, "one pose and one code per object required");
  const auto n_pixels = static_cast<std::size_t>(width) * height;
  if (instance.size() != n_pixels) throw Error(ErrorCode::kDimensionMismatch, "instance map size mismatch");
  ImageLabels labels;
  labels.width = width;
  labels.height = height;
  labels.heatmap.assign(n_pixels, 0.0f);
  labels.pose_map.assign(n_pixels * 12, 0.0f);
  labels.code_map.assign(n_pixels * kLatentDim, 0.0f);
  labels.instance_masks.assign(instance.begin(), instance.end());

  std::vector<std::vector<std::array<int, 2>>> masks(camera_poses.size());
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const auto id = instance[static_cast<std::size_t>(v) * width + u];
      if (id >= 0 && static_cast<std::size_t>(id) < masks.size()) masks[id].push_back({u, v});
    }
  }

  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (masks[k].empty()) {
      warn("object " + std::to_string(k) + " is not visible; omitted from labels");
      continue;
    }
    if (codes[k].size() != kLatentDim) throw Error(ErrorCode::kDimensionMismatch, "latent code must have 32 entries");
    labels.labelled_objects.push_back(static_cast<int>(k));
    const MaskGaussian g = fit_mask_gaussian(masks[k]);
    const Eigen::Matrix2d inv = g.covariance.inverse();
    for (int v = 0; v < height; ++v) {
      for (int u = 0; u < width; ++u) {
        const Eigen::Vector2d d(u - g.u, v - g.v);
        const auto value = static_cast<float>(std::exp(-0.5 * d.dot(inv * d)));
        float& h = labels.heatmap[static_cast<std::size_t>(v) * width + u];
        h = std::max(h, value);
      }
    }
    const Pose& p = camera_poses[k];
    std::array<float, 12> pose_vec{};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose_vec[r * 4 + c] = static_cast<float>(p.rotation(r, c));
      pose_vec[r * 4 + 3] = static_cast<float>(p.translation[r]);
    }
    for (const auto& px : masks[k]) {
      const std::size_t i = labels.pixel(px[0], px[1]);
      std::copy(pose_vec.begin(), pose_vec.end(), labels.pose_map.begin() + i * 12);
      for (int c = 0; c < kLatentDim; ++c) labels.code_map[i * kLatentDim + c] = static_cast<float>(codes[k][c]);
    }
  }
  return labels;
}

LabelledImage render_labels(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                            const SceneCamera& camera, const std::map<std::string, LatentCode>& code_lookup,
                            const std::optional<DepthNoise>& noise) {
  std::vector<Pose> poses;
  std::vector<LatentCode> codes;
  for (const auto& o : scene.objects) {
    const auto it = code_lookup.find(o.object_id);
    if (it == code_lookup.end()) throw Error(ErrorCode::kInvalidArgument, "no latent code for '" + o.object_id + "'");
    poses.push_back(camera_frame_pose(camera, o.pose));
    codes.push_back(it->second);
  }
  RenderResult r = render_scene(scene, library, camera, noise);
  LabelledImage out;
  out.labels = build_image_labels(r.instance, r.depth.width, r.depth.height, poses, codes);
  out.depth = std::move(r.depth);
  return out;
}

}  // namespace shapegrasp
