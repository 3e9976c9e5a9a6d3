#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapegrasp/datagen/labels.hpp"

namespace shapegrasp {

// "GRSP1", u64 count, then 12 float32 per grasp ([R|t] row-major).
void save_grasp_set(const std::string& path, const GraspSet& set);
std::vector<Grasp> load_grasps(const std::string& path);

// "SGDS1", u64 count, then 16 float32 per sample (x, s, delta_t, R row-major).
void save_samples(const std::string& path, const std::vector<SgdfSample>& samples);
std::vector<SgdfSample> load_samples(const std::string& path);

struct DatasetObject {
  std::string id;
  std::string mesh;     // paths relative to the dataset directory
  std::string grasps;
  std::string samples;
  std::size_t n_candidates = 0;
  std::size_t n_valid = 0;
  std::size_t n_samples = 0;
  GraspProvenance provenance;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<DatasetObject> objects;
};

inline constexpr const char* kManifestName = "manifest.json";

void save_manifest(const std::string& dir, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& dir);

}  // namespace shapegrasp
