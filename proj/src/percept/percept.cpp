#include "shapegrasp/percept/percept.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

namespace {

MapTensor make_map(int width, int height, int channels, std::vector<float> data) {
  MapTensor m;
  m.width = width;
  m.height = height;
  m.channels = channels;
  m.data = std::move(data);
  return m;
}

Mat3 read_block(const MapTensor& pose, std::size_t pixel) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = pose.data[pixel * 12 + r * 4 + c];
  return m;
}

Vec3 read_translation(const MapTensor& pose, std::size_t pixel) {
  return Vec3(pose.data[pixel * 12 + 3], pose.data[pixel * 12 + 7], pose.data[pixel * 12 + 11]);
}

bool degenerate_block(const Mat3& m) {
  if (!m.allFinite()) return true;
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Mat3>(m).singularValues();
  return !(sv(2) > 1e-6 * sv(0));
}

}  // namespace

void save_map(const std::string& path, const MapTensor& map) {
  if (map.data.size() != static_cast<std::size_t>(map.height) * map.width * map.channels)
    throw Error(ErrorCode::kDimensionMismatch, "map data does not match its shape");
  BinaryWriter w;
  w.magic("MAPS1");
  w.u32(static_cast<std::uint32_t>(map.height));
  w.u32(static_cast<std::uint32_t>(map.width));
  w.u32(static_cast<std::uint32_t>(map.channels));
  for (float f : map.data) w.f32(f);
  w.save(path);
}

MapTensor load_map(const std::string& path) {
  BinaryReader r = BinaryReader::open(path);
  r.expect_magic("MAPS1");
  MapTensor m;
  m.height = static_cast<int>(r.u32());
  m.width = static_cast<int>(r.u32());
  m.channels = static_cast<int>(r.u32());
  const std::size_t n = static_cast<std::size_t>(m.height) * m.width * m.channels;
  m.data.resize(n);
  for (auto& f : m.data) f = r.f32();
  if (!r.at_end()) throw Error(ErrorCode::kIo, "trailing bytes in " + path);
  return m;
}

void EncoderMaps::validate() const {
  const auto check = [&](const MapTensor& m, int channels, const char* name) {
    if (m.width != heatmap.width || m.height != heatmap.height || (channels > 0 && m.channels != channels) ||
        m.data.size() != static_cast<std::size_t>(m.width) * m.height * m.channels)
      throw Error(ErrorCode::kDimensionMismatch, std::string("encoder map '") + name + "' has the wrong shape");
  };
  check(heatmap, 1, "heatmap");
  check(pose, 12, "pose");
  check(code, 0, "code");
}

EncoderMaps maps_from_labels(const ImageLabels& labels) {
  const int w = labels.width, h = labels.height;
  const auto n = static_cast<std::size_t>(w) * h;
  const int code_channels = n == 0 ? kLatentDim : static_cast<int>(labels.code_map.size() / n);
  return EncoderMaps{make_map(w, h, 1, labels.heatmap), make_map(w, h, 12, labels.pose_map),
                     make_map(w, h, code_channels, labels.code_map)};
}

std::vector<Peak> extract_peaks(const MapTensor& heatmap, double threshold, int window) {
  if (heatmap.channels != 1) throw Error(ErrorCode::kDimensionMismatch, "heatmap must have one channel");
  std::vector<Peak> candidates;
  for (int v = 0; v < heatmap.height; ++v) {
    for (int u = 0; u < heatmap.width; ++u) {
      const float value = heatmap.at(u, v);
      if (!(value >= threshold)) continue;
      bool strict = true;
      for (int dv = -window; dv <= window && strict; ++dv) {
        for (int du = -window; du <= window; ++du) {
          const int uu = u + du, vv = v + dv;
          if ((du == 0 && dv == 0) || uu < 0 || vv < 0 || uu >= heatmap.width || vv >= heatmap.height) continue;
          if (heatmap.at(uu, vv) >= value) {
            strict = false;
            break;
          }
        }
      }
      if (strict) candidates.push_back({u, v, value});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
  std::vector<Peak> kept;
  for (const auto& p : candidates) {
    bool near = false;
    for (const auto& k : kept) near = near || std::hypot(p.u - k.u, p.v - k.v) < window;
    if (!near) kept.push_back(p);
  }
  return kept;
}

std::vector<Detection> decode_detections(const EncoderMaps& maps, double threshold, int window) {
  maps.validate();
  std::vector<Detection> out;
  for (const auto& peak : extract_peaks(maps.heatmap, threshold, window)) {
    const std::size_t pixel = static_cast<std::size_t>(peak.v) * maps.heatmap.width + peak.u;
    const Mat3 block = read_block(maps.pose, pixel);
    const Vec3 t = read_translation(maps.pose, pixel);
    if (degenerate_block(block) || !t.allFinite()) {
      warn("dropping detection at pixel (" + std::to_string(peak.u) + ", " + std::to_string(peak.v) +
           "): degenerate pose block");
      continue;
    }
    Detection d;
    d.u = peak.u;
    d.v = peak.v;
    d.objectness = peak.value;
    d.pose = make_transform(t, procrustes_project(block));
    d.code.resize(maps.code.channels);
    for (int c = 0; c < maps.code.channels; ++c) d.code[c] = maps.code.data[pixel * maps.code.channels + c];
    out.push_back(std::move(d));
  }
  return out;
}

std::array<Vec3, 4> pose_points(const Pose& pose, double d) {
  return {pose.translation, pose.apply(Vec3(d, 0, 0)), pose.apply(Vec3(0, d, 0)), pose.apply(Vec3(0, 0, d))};
}

EncoderLoss encoder_loss(const EncoderMaps& pred, const ImageLabels& gt, const EncoderLossWeights& weights) {
  pred.validate();
  const auto n = static_cast<std::size_t>(gt.width) * gt.height;
  if (pred.heatmap.width != gt.width || pred.heatmap.height != gt.height || gt.heatmap.size() != n ||
      gt.instance_masks.size() != n || pred.code.data.size() != gt.code_map.size())
    throw Error(ErrorCode::kDimensionMismatch, "prediction and labels differ in shape");
  const int channels = pred.code.channels;
  EncoderLoss loss;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.heatmap.data[i] - gt.heatmap[i];
    sq += d * d;
  }
  loss.heat = n == 0 ? 0.0 : sq / static_cast<double>(n);

  double weight_sum = 0.0, pose_sum = 0.0, shape_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.instance_masks[i] < 0) continue;
    const double w = gt.heatmap[i];
    if (w <= 0.0) continue;
    const Pose p = make_transform(read_translation(pred.pose, i), procrustes_project(read_block(pred.pose, i)));
    const Mat3 gr = [&] {
      Mat3 m;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = gt.pose_map[i * 12 + r * 4 + c];
      return m;
    }();
    const Vec3 gtt(gt.pose_map[i * 12 + 3], gt.pose_map[i * 12 + 7], gt.pose_map[i * 12 + 11]);
    Pose g;
    g.rotation = procrustes_project(gr);
    g.translation = gtt;
    const auto a = pose_points(p), b = pose_points(g);
    double dist = 0.0;
    for (int k = 0; k < 4; ++k) dist += (a[k] - b[k]).norm();
    double l1 = 0.0;
    for (int c = 0; c < channels; ++c)
      l1 += std::abs(static_cast<double>(pred.code.data[i * channels + c]) - gt.code_map[i * channels + c]);
    weight_sum += w;
    pose_sum += w * dist / 4.0;
    shape_sum += w * l1 / channels;
  }
  if (weight_sum > 0.0) {
    loss.pose = pose_sum / weight_sum;
    loss.shape = shape_sum / weight_sum;
  }
  loss.total = weights.heat * loss.heat + weights.pose * loss.pose + weights.shape * loss.shape;
  return loss;
}

EncoderMaps oracle_encoder(const SceneRecord& scene, const SceneCamera& camera, std::span<const std::int32_t> instance,
                           int width, int height, const std::map<std::string, LatentCode>& code_lookup,
                           const OracleNoise& noise) {
  std::vector<Pose> poses;
  std::vector<LatentCode> codes;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    const auto it = code_lookup.find(o.object_id);
    if (it == code_lookup.end()) throw Error(ErrorCode::kInvalidArgument, "no latent code for '" + o.object_id + "'");
    Pose pose = camera_frame_pose(camera, o.pose);
    LatentCode code = it->second;
    Rng rng(derive_seed(noise.seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (noise.sigma_trans > 0.0) {
      for (int a = 0; a < 3; ++a) pose.translation[a] += noise.sigma_trans * gauss(rng);
    }
    if (noise.sigma_rot > 0.0) {
      Vec3 axis;
      do {
        axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
      } while (axis.norm() < 1e-12);
      pose.rotation = axis_angle(axis, noise.sigma_rot * gauss(rng)) * pose.rotation;
    }
    if (noise.sigma_code > 0.0) {
      for (Eigen::Index c = 0; c < code.size(); ++c) code[c] += noise.sigma_code * gauss(rng);
    }
    poses.push_back(pose);
    codes.push_back(std::move(code));
  }
  return maps_from_labels(build_image_labels(instance, width, height, poses, codes));
}

EncoderMaps oracle_encoder(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                           const SceneCamera& camera, const std::map<std::string, LatentCode>& code_lookup,
                           const OracleNoise& noise) {
  const RenderResult r = render_scene(scene, library, camera);
  return oracle_encoder(scene, camera, r.instance, r.depth.width, r.depth.height, code_lookup, noise);
}

}  // namespace shapegrasp
