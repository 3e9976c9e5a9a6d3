#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shapegrasp/datagen/scene.hpp"
#include "shapegrasp/latent.hpp"

namespace shapegrasp {

// H x W x C float tensor, row-major over pixels, channel-minor.
struct MapTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  std::size_t index(int u, int v, int c = 0) const {
    return (static_cast<std::size_t>(v) * width + u) * channels + c;
  }
  float at(int u, int v, int c = 0) const { return data[index(u, v, c)]; }
};

// "MAPS1", u32 H, u32 W, u32 C, float32 data.
void save_map(const std::string& path, const MapTensor& map);
MapTensor load_map(const std::string& path);

// Encoder output heads: objectness (1 channel), pose (12, row-major [R|t]),
// latent code (kLatentDim).
struct EncoderMaps {
  MapTensor heatmap;
  MapTensor pose;
  MapTensor code;

  // Throws kDimensionMismatch when the maps disagree in size.
  void validate() const;
};

EncoderMaps maps_from_labels(const ImageLabels& labels);

struct Peak {
  int u = 0;
  int v = 0;
  double value = 0.0;
};

// Strict maxima of their (2 window + 1)^2 neighbourhood at or above
// threshold, strongest first. A peak within `window` pixels of a stronger
// one is suppressed.
std::vector<Peak> extract_peaks(const MapTensor& heatmap, double threshold = 0.4, int window = 5);

struct Detection {
  int u = 0;
  int v = 0;
  double objectness = 0.0;
  Pose pose;  // camera frame
  LatentCode code;
};

// Reads pose and code at every peak; the 3x3 block is projected onto the
// nearest rotation. Peaks with a degenerate block are dropped with a warning.
std::vector<Detection> decode_detections(const EncoderMaps& maps, double threshold = 0.4, int window = 5);

inline constexpr double kPosePointScale = 0.1;

// The pose applied to {0, d e1, d e2, d e3}.
std::array<Vec3, 4> pose_points(const Pose& pose, double d = kPosePointScale);

struct EncoderLossWeights {
  double heat = 100.0;
  double pose = 5.0;
  double shape = 1.0;
};

struct EncoderLoss {
  double heat = 0.0;
  double pose = 0.0;
  double shape = 0.0;
  double total = 0.0;
};

// heat: MSE over all pixels. pose and shape: over ground-truth mask pixels,
// weighted by the ground-truth heatmap and normalised by the weight sum;
// pose compares the four pose points (mean distance), shape the codes
// (mean absolute difference per channel).
EncoderLoss encoder_loss(const EncoderMaps& pred, const ImageLabels& gt, const EncoderLossWeights& weights = {});

struct OracleNoise {
  double sigma_trans = 0.0;  // meters, per axis
  double sigma_rot = 0.0;    // radians, angle about a uniform random axis
  double sigma_code = 0.0;   // per channel
  std::uint64_t seed = 0;
};

// Ground-truth maps with per-object perturbations of pose and code, built
// on a given instance map.
EncoderMaps oracle_encoder(const SceneRecord& scene, const SceneCamera& camera, std::span<const std::int32_t> instance,
                           int width, int height, const std::map<std::string, LatentCode>& code_lookup,
                           const OracleNoise& noise);

// Same, rendering the instance map first.
EncoderMaps oracle_encoder(const SceneRecord& scene, const std::vector<ObjectRecord>& library,
                           const SceneCamera& camera, const std::map<std::string, LatentCode>& code_lookup,
                           const OracleNoise& noise);

}  // namespace shapegrasp
