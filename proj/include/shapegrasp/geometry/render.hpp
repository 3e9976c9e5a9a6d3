#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapegrasp/geometry/mesh.hpp"

namespace shapegrasp {

// Camera convention: +z forward, +x right, +y down, pixel (0,0) top-left,
// rays through pixel centres. Depth is the z coordinate in the camera frame.
inline constexpr float kNoDepth = 0.0f;
inline constexpr std::int32_t kBackground = -1;

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;  // row-major, kNoDepth where nothing was hit

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > kNoDepth; }
};

struct DepthNoise {
  double sigma = 0.002;   // additive zero-mean Gaussian, meters
  double dropout = 0.0;   // per-pixel probability of a missing reading
  std::uint64_t seed = 0;
};

struct MeshInstance {
  const TriMesh* mesh = nullptr;  // non-owning
  Pose pose;                      // object-to-world
};

struct RenderResult {
  DepthImage depth;
  std::vector<std::int32_t> instance;  // index into the instance list or kBackground
};

// Pinhole ray casting over all instances; camera_pose is camera-to-world.
// Noise touches depth only.
RenderResult render_depth(std::span<const MeshInstance> meshes, const CameraIntrinsics& camera,
                          const Pose& camera_pose, const std::optional<DepthNoise>& noise = std::nullopt);

struct BackprojectedCloud {
  PointCloud cloud;                          // camera frame
  std::vector<std::array<int, 2>> pixels;    // (u, v) per point
};

BackprojectedCloud backproject(const DepthImage& depth, const CameraIntrinsics& camera);

// Raw depth file: "DPTH", u32 width, u32 height, float32 LE row-major meters.
void write_depth_raw(const std::string& path, const DepthImage& depth);
DepthImage read_depth_raw(const std::string& path);

}  // namespace shapegrasp
