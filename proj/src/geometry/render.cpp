#include "shapegrasp/geometry/render.hpp"

#include <fstream>
#include <random>

#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/bvh.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

RenderResult render_depth(std::span<const MeshInstance> meshes, const CameraIntrinsics& camera,
                          const Pose& camera_pose, const std::optional<DepthNoise>& noise) {
  camera.validate();
  if (meshes.empty()) throw Error(ErrorCode::kInvalidArgument, "render_depth needs at least one mesh");

  // Merge every instance into one camera-frame mesh; remember the owner of
  // each triangle.
  const Pose world_to_camera = camera_pose.inverse();
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::int32_t> owner;
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    const TriMesh& m = *meshes[k].mesh;
    const Pose to_camera = world_to_camera * meshes[k].pose;
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (const auto& v : m.vertices) vertices.push_back(to_camera.apply(v));
    for (const auto& t : m.triangles) {
      triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
      owner.push_back(static_cast<std::int32_t>(k));
    }
  }
  // Build directly so triangle indices stay aligned with `owner` (inputs
  // are already filtered meshes).
  TriMesh merged;
  merged.vertices = std::move(vertices);
  merged.triangles = std::move(triangles);
  const IndexedMesh scene(std::move(merged));

  RenderResult out;
  out.depth.width = camera.width;
  out.depth.height = camera.height;
  const auto n_pixels = static_cast<std::size_t>(camera.width) * camera.height;
  out.depth.depth.assign(n_pixels, kNoDepth);
  out.instance.assign(n_pixels, kBackground);

  const Vec3 origin = Vec3::Zero();
  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      const Vec3 dir = camera.pixel_ray(u, v);
      const auto hit = scene.first_hit(origin, dir, 1e-9);
      if (!hit) continue;
      const auto idx = static_cast<std::size_t>(v) * camera.width + u;
      // dir has unit z, so the ray parameter is the z-depth.
      out.depth.depth[idx] = static_cast<float>(hit->t);
      out.instance[idx] = owner[hit->triangle];
    }
  }

  if (noise) {
    Rng rng(noise->seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (auto& d : out.depth.depth) {
      if (d == kNoDepth) continue;
      const double g = gauss(rng);
      const double drop = uniform(rng);
      if (noise->dropout > 0.0 && drop < noise->dropout) {
        d = kNoDepth;
        continue;
      }
      d = static_cast<float>(d + noise->sigma * g);
      if (d <= kNoDepth) d = kNoDepth;
    }
  }
  return out;
}

BackprojectedCloud backproject(const DepthImage& depth, const CameraIntrinsics& camera) {
  BackprojectedCloud out;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(u, v)) continue;
      out.cloud.points.push_back(camera.pixel_ray(u, v) * static_cast<double>(depth.at(u, v)));
      out.pixels.push_back({u, v});
    }
  }
  return out;
}

void write_depth_raw(const std::string& path, const DepthImage& depth) {
  BinaryWriter w;
  w.magic("DPTH");
  w.u32(static_cast<std::uint32_t>(depth.width));
  w.u32(static_cast<std::uint32_t>(depth.height));
  for (float d : depth.depth) w.f32(d);
  w.save(path);
}

DepthImage read_depth_raw(const std::string& path) {
  BinaryReader r = BinaryReader::open(path);
  r.expect_magic("DPTH");
  DepthImage img;
  img.width = static_cast<int>(r.u32());
  img.height = static_cast<int>(r.u32());
  img.depth.resize(static_cast<std::size_t>(img.width) * img.height);
  for (auto& d : img.depth) d = r.f32();
  return img;
}

}  // namespace shapegrasp
