#include "shapegrasp/datagen/dataset_io.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

void write_pose(BinaryWriter& w, const Pose& p) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(p.rotation(r, c)));
    w.f32(static_cast<float>(p.translation[r]));
  }
}

Pose read_pose(BinaryReader& in) {
  Pose p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = in.f32();
    p.translation[r] = in.f32();
  }
  return p;
}

}  // namespace

void save_grasp_set(const std::string& path, const GraspSet& set) {
  BinaryWriter w;
  w.magic("GRSP1");
  w.u64(set.grasps.size());
  for (const auto& g : set.grasps) write_pose(w, g.pose);
  w.save(path);
}

std::vector<Grasp> load_grasps(const std::string& path) {
  BinaryReader in = BinaryReader::open(path);
  in.expect_magic("GRSP1");
  const std::uint64_t n = in.u64();
  std::vector<Grasp> out(n);
  for (auto& g : out) g.pose = read_pose(in);
  if (!in.at_end()) throw Error(ErrorCode::kIo, "trailing bytes in " + path);
  return out;
}

void save_samples(const std::string& path, const std::vector<SgdfSample>& samples) {
  BinaryWriter w;
  w.magic("SGDS1");
  w.u64(samples.size());
  for (const auto& s : samples) {
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(s.x[a]));
    w.f32(static_cast<float>(s.s));
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(s.delta_t[a]));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(s.rotation(r, c)));
    }
  }
  w.save(path);
}

std::vector<SgdfSample> load_samples(const std::string& path) {
  BinaryReader in = BinaryReader::open(path);
  in.expect_magic("SGDS1");
  const std::uint64_t n = in.u64();
  std::vector<SgdfSample> out(n);
  for (auto& s : out) {
    for (int a = 0; a < 3; ++a) s.x[a] = in.f32();
    s.s = in.f32();
    for (int a = 0; a < 3; ++a) s.delta_t[a] = in.f32();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) s.rotation(r, c) = in.f32();
    }
  }
  if (!in.at_end()) throw Error(ErrorCode::kIo, "trailing bytes in " + path);
  return out;
}

void save_manifest(const std::string& dir, const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["format"] = "shapegrasp-dataset";
  j["version"] = 1;
  j["seed"] = manifest.seed;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : manifest.objects) {
    nlohmann::ordered_json e;
    e["id"] = o.id;
    e["mesh"] = o.mesh;
    e["grasps"] = o.grasps;
    e["samples"] = o.samples;
    e["n_candidates"] = o.n_candidates;
    e["n_valid"] = o.n_valid;
    e["n_samples"] = o.n_samples;
    e["provenance"] = {{"n_surface_points", o.provenance.n_surface_points},
                       {"n_rotations", o.provenance.n_rotations},
                       {"mu", o.provenance.mu},
                       {"clearance", o.provenance.clearance}};
    j["objects"].push_back(e);
  }
  write_text_file((std::filesystem::path(dir) / kManifestName).string(), j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::string& dir) {
  const auto path = (std::filesystem::path(dir) / kManifestName).string();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, "malformed manifest " + path + ": " + e.what());
  }
  if (j.value("format", "") != "shapegrasp-dataset") throw Error(ErrorCode::kBadMagic, "not a dataset manifest: " + path);
  if (j.value("version", 0) != 1) throw Error(ErrorCode::kVersionMismatch, "unsupported manifest version: " + path);
  DatasetManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("objects")) {
      DatasetObject o;
      o.id = e.at("id").get<std::string>();
      o.mesh = e.at("mesh").get<std::string>();
      o.grasps = e.at("grasps").get<std::string>();
      o.samples = e.at("samples").get<std::string>();
      o.n_candidates = e.at("n_candidates").get<std::size_t>();
      o.n_valid = e.at("n_valid").get<std::size_t>();
      o.n_samples = e.at("n_samples").get<std::size_t>();
      const auto& p = e.at("provenance");
      o.provenance = {p.at("n_surface_points").get<std::size_t>(), p.at("n_rotations").get<std::size_t>(),
                      p.at("mu").get<double>(), p.at("clearance").get<double>()};
      m.objects.push_back(o);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, "malformed manifest " + path + ": " + e.what());
  }
  return m;
}

}  // namespace shapegrasp
