#include "shapegrasp/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/mesh_io.hpp"
#include "shapegrasp/geometry/sampling.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos do not pass silently.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorCode::kConfig, "unknown config key '" + where + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config key '") + key + "': " + e.what());
  }
}

void read_vec3(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v);
  if (v.size() != 3) throw Error(ErrorCode::kConfig, std::string("config key '") + key + "' needs three numbers");
  out = Vec3(v[0], v[1], v[2]);
}

json pose_to_json(const Pose& p) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(p.rotation(r, c));
    a.push_back(p.translation(r));
  }
  return a;
}

Pose pose_from_json(const json& a) {
  if (!a.is_array() || a.size() != 12) throw Error(ErrorCode::kConfig, "pose must be 12 numbers");
  Mat3 r;
  Vec3 t;
  for (int row = 0; row < 3; ++row) {
    for (int c = 0; c < 3; ++c) r(row, c) = a[row * 4 + c].get<double>();
    t(row) = a[row * 4 + 3].get<double>();
  }
  try {
    return make_transform(t, r);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("scene pose: ") + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string loss_log_path(const std::string& checkpoint) { return checkpoint + ".loss.csv"; }

}  // namespace

GripperModel RunConfig::gripper_model() const {
  if (gripper.empty()) return GripperModel::default_model();
  return load_gripper_config(gripper);
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  }
  check_keys(j,
             {"seed", "dataset", "checkpoint", "output", "gripper", "scene", "objects", "meshes", "gen", "train",
              "grid", "camera", "noise", "plan", "eval"},
             "");
  RunConfig c;
  read(j, "seed", c.seed);
  read(j, "dataset", c.dataset);
  read(j, "checkpoint", c.checkpoint);
  read(j, "output", c.output);
  read(j, "gripper", c.gripper);
  read(j, "scene", c.scene);
  read(j, "objects", c.objects);
  if (j.contains("meshes")) {
    if (!j["meshes"].is_array()) throw Error(ErrorCode::kConfig, "meshes must be an array");
    for (const auto& m : j["meshes"]) {
      check_keys(m, {"id", "path"}, "meshes.");
      MeshEntry e;
      read(m, "id", e.id);
      read(m, "path", e.path);
      if (e.id.empty() || e.path.empty()) throw Error(ErrorCode::kConfig, "mesh entries need id and path");
      c.meshes.push_back(e);
    }
  }
  if (j.contains("gen")) {
    const auto& g = j["gen"];
    check_keys(g, {"n_surface_points", "n_rotations", "mu", "clearance", "n_samples"}, "gen.");
    read(g, "n_surface_points", c.gen.n_surface_points);
    read(g, "n_rotations", c.gen.n_rotations);
    read(g, "mu", c.gen.mu);
    read(g, "clearance", c.gen.clearance);
    read(g, "n_samples", c.gen.n_samples);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t,
               {"epochs", "learning_rate", "batch_size", "clamp", "latent_dim", "hidden_layers", "width",
                "skip_layer", "dropout", "coord_scale", "weight_sdf", "weight_grasp", "weight_code"},
               "train.");
    read(t, "epochs", c.train.epochs);
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "batch_size", c.train.batch_size);
    read(t, "clamp", c.train.clamp);
    read(t, "latent_dim", c.train.arch.latent_dim);
    read(t, "hidden_layers", c.train.arch.hidden_layers);
    read(t, "width", c.train.arch.width);
    read(t, "skip_layer", c.train.arch.skip_layer);
    read(t, "dropout", c.train.arch.dropout);
    read(t, "coord_scale", c.train.arch.coord_scale);
    read(t, "weight_sdf", c.train.weights.sdf);
    read(t, "weight_grasp", c.train.weights.grasp);
    read(t, "weight_code", c.train.weights.code);
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, {"resolution", "min", "max", "epsilon"}, "grid.");
    read(g, "resolution", c.grid.resolution);
    Vec3 lo = c.grid.bounds.min(), hi = c.grid.bounds.max();
    read_vec3(g, "min", lo);
    read_vec3(g, "max", hi);
    c.grid.bounds = Box3(lo, hi);
    read(g, "epsilon", c.grid.epsilon);
  }
  if (j.contains("camera")) {
    const auto& k = j["camera"];
    check_keys(k, {"fx", "fy", "cx", "cy", "width", "height", "eye", "target"}, "camera.");
    auto& in = c.camera.intrinsics;
    read(k, "fx", in.fx);
    read(k, "fy", in.fy);
    read(k, "cx", in.cx);
    read(k, "cy", in.cy);
    read(k, "width", in.width);
    read(k, "height", in.height);
    Vec3 eye(0.0, -0.35, 0.5), target(0.0, 0.0, 0.04);
    read_vec3(k, "eye", eye);
    read_vec3(k, "target", target);
    c.camera.pose = look_at(eye, target);
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    check_keys(n, {"sigma_trans", "sigma_rot", "sigma_code", "depth_sigma"}, "noise.");
    read(n, "sigma_trans", c.noise.sigma_trans);
    read(n, "sigma_rot", c.noise.sigma_rot);
    read(n, "sigma_code", c.noise.sigma_code);
    read(n, "depth_sigma", c.depth_sigma);
  }
  if (j.contains("plan")) {
    const auto& p = j["plan"];
    check_keys(p, {"clearance", "refine"}, "plan.");
    read(p, "clearance", c.plan.clearance);
    read(p, "refine", c.plan.refine);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, {"n_scenes", "scene_seed", "mu", "clearance", "ap_mu", "reference_points"}, "eval.");
    read(e, "n_scenes", c.eval.n_scenes);
    read(e, "scene_seed", c.eval.scene_seed);
    read(e, "mu", c.eval.mu);
    read(e, "clearance", c.eval.clearance);
    read(e, "ap_mu", c.eval.ap_mu);
    read(e, "reference_points", c.eval.reference_points);
  }
  try {
    c.train.validate();
    c.grid.validate();
    c.camera.intrinsics.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (c.gen.n_surface_points == 0 || c.gen.n_rotations == 0 || c.gen.n_samples == 0 || !(c.gen.mu > 0.0) ||
      c.gen.clearance < 0.0)
    throw Error(ErrorCode::kConfig, "gen settings must be positive");
  if (c.noise.sigma_trans < 0.0 || c.noise.sigma_rot < 0.0 || c.noise.sigma_code < 0.0 || c.depth_sigma < 0.0)
    throw Error(ErrorCode::kConfig, "noise levels must be non-negative");
  if (!(c.eval.mu > 0.0) || c.eval.clearance < 0.0 || c.eval.reference_points == 0)
    throw Error(ErrorCode::kConfig, "eval settings are out of range");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::vector<ObjectRecord> resolve_objects(const RunConfig& config) {
  std::vector<ObjectRecord> out;
  std::set<std::string> ids;
  const auto add = [&](ObjectRecord r) {
    if (!ids.insert(r.id).second) throw Error(ErrorCode::kConfig, "object id '" + r.id + "' listed twice");
    out.push_back(std::move(r));
  };
  for (const auto& m : config.meshes)
    if (!fs::exists(m.path)) throw Error(ErrorCode::kIo, "mesh file not found: " + m.path);
  if (config.objects.empty() && config.meshes.empty())
    for (auto& r : builtin_library()) add(std::move(r));
  for (const auto& id : config.objects) {
    try {
      add(builtin_object(id));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
  }
  for (const auto& m : config.meshes) add(make_object_record(m.id, center_on_bounds(load_mesh(m.path))));
  return out;
}

std::vector<ObjectRecord> load_dataset_library(const std::string& dir, const DatasetManifest& manifest) {
  std::vector<ObjectRecord> out;
  for (const auto& o : manifest.objects) out.push_back(make_object_record(o.id, load_mesh(join(dir, o.mesh))));
  return out;
}

SceneRecord load_scene(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "malformed scene " + path + ": " + e.what());
  }
  SceneRecord s;
  try {
    for (const auto& o : j.at("objects")) s.objects.push_back({o.at("id").get<std::string>(), pose_from_json(o.at("pose"))});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "malformed scene " + path + ": " + e.what());
  }
  return s;
}

void save_scene(const std::string& path, const SceneRecord& scene) {
  json j;
  j["objects"] = json::array();
  for (const auto& o : scene.objects) j["objects"].push_back({{"id", o.object_id}, {"pose", pose_to_json(o.pose)}});
  write_text_file(path, j.dump(2) + "\n");
}

Vec3 camera_gravity(const SceneCamera& camera) { return camera.pose.rotation.transpose() * Vec3(0.0, 0.0, -1.0); }

std::map<std::string, LatentCode> code_lookup(const LatentTable& table) {
  std::map<std::string, LatentCode> out;
  for (std::size_t i = 0; i < table.size(); ++i) out[table.ids[i]] = table.codes[i];
  return out;
}

PlanResult OraclePlanner::plan_scene(const SceneRecord& scene, const RenderResult& observation) const {
  const EncoderMaps maps = oracle_encoder(scene, camera, observation.instance, observation.depth.width,
                                          observation.depth.height, codes, noise);
  const std::vector<Detection> detections = decode_detections(maps);
  const SceneObservation obs = make_observation(observation.depth, camera.intrinsics);
  PlanParams p = params;
  p.gravity = camera_gravity(camera);
  return plan(detections, *cache, obs, gripper, p);
}

std::vector<Grasp> OraclePlanner::operator()(const SceneRecord& scene, const RenderResult& observation) const {
  const PlanResult r = plan_scene(scene, observation);
  std::vector<Grasp> out;
  for (std::size_t i : r.ranking) out.push_back(r.objects[i].choice->grasp);
  return out;
}

DatasetManifest cmd_gen(const RunConfig& config, std::ostream& log) {
  const std::vector<ObjectRecord> objects = resolve_objects(config);
  const GripperModel gripper = config.gripper_model();
  ensure_dir(config.dataset);
  DatasetManifest manifest;
  manifest.seed = config.seed;
  const GraspProvenance provenance{config.gen.n_surface_points, config.gen.n_rotations, config.gen.mu,
                                   config.gen.clearance};
  for (const auto& obj : objects) {
    const IndexedMesh mesh(obj.mesh);
    const auto candidates =
        generate_candidates(obj.mesh, gripper, config.gen.n_surface_points, config.gen.n_rotations,
                            derive_seed(derive_seed(config.seed, "candidates"), obj.id));
    const GraspSet set = label_valid_grasps(mesh, candidates, gripper, provenance, obj.id);
    if (set.grasps.empty()) throw Error(ErrorCode::kNoGrasps, "object '" + obj.id + "' has no valid grasp");
    const auto samples =
        sample_sgdf(mesh, set, config.gen.n_samples, derive_seed(derive_seed(config.seed, "samples"), obj.id));
    DatasetObject entry;
    entry.id = obj.id;
    entry.mesh = obj.id + ".obj";
    entry.grasps = obj.id + ".grasps";
    entry.samples = obj.id + ".samples";
    entry.n_candidates = candidates.size();
    entry.n_valid = set.grasps.size();
    entry.n_samples = samples.size();
    entry.provenance = provenance;
    save_obj(join(config.dataset, entry.mesh), obj.mesh);
    save_grasp_set(join(config.dataset, entry.grasps), set);
    save_samples(join(config.dataset, entry.samples), samples);
    log << obj.id << ": " << entry.n_valid << " valid of " << entry.n_candidates << " candidates, "
        << entry.n_samples << " samples\n";
    manifest.objects.push_back(entry);
  }
  save_manifest(config.dataset, manifest);
  return manifest;
}

TrainResult cmd_train(const RunConfig& config, std::ostream& log) {
  const DatasetManifest manifest = load_manifest(config.dataset);
  if (manifest.objects.empty()) throw Error(ErrorCode::kConfig, "dataset has no objects");
  std::vector<TrainObject> objects;
  for (const auto& o : manifest.objects) objects.push_back({o.id, load_samples(join(config.dataset, o.samples))});
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  TrainResult r = train(objects, tc, config.gripper_model(), [&](const EpochLoss& e) {
    log << "epoch " << e.epoch << ": total " << e.loss.total << " (sdf " << e.loss.sdf << ", grasp " << e.loss.grasp
        << ", code " << e.loss.code << ")\n";
    log.flush();
  });
  if (r.aborted) throw Error(ErrorCode::kNonFiniteLoss, "training aborted, checkpoint left untouched: " + r.message);
  const fs::path parent = fs::path(config.checkpoint).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  save_checkpoint(config.checkpoint, {config.seed, r.decoder, r.latents});
  write_text_file(loss_log_path(config.checkpoint), loss_log_csv(r.log));
  log << "wrote " << config.checkpoint << " and " << loss_log_path(config.checkpoint) << "\n";
  return r;
}

PlanResult cmd_plan(const RunConfig& config, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(config.checkpoint);
  const DatasetManifest manifest = load_manifest(config.dataset);
  const std::vector<ObjectRecord> library = load_dataset_library(config.dataset, manifest);
  const SceneRecord scene =
      config.scene.empty() ? make_packed_scene(library, derive_seed(config.seed, "scene")) : load_scene(config.scene);
  std::optional<DepthNoise> depth_noise;
  if (config.depth_sigma > 0.0) depth_noise = DepthNoise{config.depth_sigma, 0.0, derive_seed(config.seed, "depth")};
  const RenderResult observation = render_scene(scene, library, config.camera, depth_noise);

  DecodeCache cache(ck.decoder, config.grid);
  OraclePlanner planner{&library, code_lookup(ck.latents), &cache, config.camera, config.gripper_model(),
                        config.noise, config.plan};
  planner.noise.seed = derive_seed(config.seed, "oracle");
  const PlanResult result = planner.plan_scene(scene, observation);

  ensure_dir(config.output);
  json j = json::parse(plan_to_json(result));
  j["seed"] = config.seed;
  write_text_file(join(config.output, "plan.json"), j.dump(2) + "\n");
  write_plan_ply(join(config.output, "plan.ply"), result);
  save_scene(join(config.output, "scene.json"), scene);
  log << "scene: " << scene.objects.size() << " objects; detections " << result.objects.size() << "; grasps decoded "
      << result.decoded << ", collision-free " << result.survivors << ", selected " << result.selected << "\n";
  return result;
}

std::vector<MetricReport> cmd_eval(const RunConfig& config, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(config.checkpoint);
  const DatasetManifest manifest = load_manifest(config.dataset);
  const std::vector<ObjectRecord> library = load_dataset_library(config.dataset, manifest);
  ensure_dir(config.output);
  std::vector<MetricReport> reports;
  if (config.eval.n_scenes == 0) {
    write_text_file(join(config.output, "report.json"), report_to_json(reports) + "\n");
    write_text_file(join(config.output, "report.txt"), report_to_text(reports));
    log << "no scenes requested; empty report\n";
    return reports;
  }
  const GripperModel gripper = config.gripper_model();
  DecodeCache cache(ck.decoder, config.grid);

  MetricReport rec;
  rec.environment = "reconstruction";
  double cd = 0.0, iou = 0.0;
  std::map<double, double> ap;
  std::size_t n_shapes = 0, n_ap = 0;
  for (const auto& obj : library) {
    std::shared_ptr<const ReconstructedObject> shape;
    try {
      shape = cache.get(ck.latents.at(obj.id));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyReconstruction) throw;
      log << obj.id << ": " << e.what() << "\n";
      continue;
    }
    const PointCloud ref =
        sample_surface(obj.mesh, config.eval.reference_points, derive_seed(config.seed, "reference:" + obj.id));
    const double c = chamfer(shape->surface_points, ref);
    const double v = iou3d(shape->surface_points, ref);
    cd += c;
    iou += v;
    ++n_shapes;
    std::ostringstream line;
    line << obj.id << ": CD " << c << " mm, IoU " << v << ", grasps " << shape->grasps.size();
    if (!shape->grasps.empty()) {
      const IndexedMesh im(obj.mesh);
      for (const auto& [mu, p] : quality_sweep(shape->grasps, im, Pose{}, config.eval.ap_mu, gripper, kQualityTopK,
                                               config.eval.clearance)) {
        ap[mu] += p;
        line << ", sAP@" << mu << " " << p;
      }
      ++n_ap;
    }
    log << line.str() << "\n";
  }
  if (n_shapes > 0) {
    rec.chamfer_mm = cd / static_cast<double>(n_shapes);
    rec.iou = iou / static_cast<double>(n_shapes);
  }
  for (auto& [mu, p] : ap) rec.ap_per_mu[mu] = n_ap ? p / static_cast<double>(n_ap) : 0.0;
  reports.push_back(rec);

  OraclePlanner planner{&library, code_lookup(ck.latents), &cache, config.camera, gripper, config.noise, config.plan};
  planner.noise.seed = derive_seed(config.seed, "oracle");
  EpisodeParams ep;
  ep.mu = config.eval.mu;
  ep.clearance = config.eval.clearance;
  if (config.depth_sigma > 0.0) ep.depth_noise = DepthNoise{config.depth_sigma, 0.0, derive_seed(config.seed, "depth")};
  std::vector<EpisodeLog> logs;
  std::size_t total = 0;
  json episodes = json::array();
  for (std::size_t s = 0; s < config.eval.n_scenes; ++s) {
    const SceneRecord scene = make_packed_scene(library, derive_seed(config.eval.scene_seed, s));
    total += scene.objects.size();
    const EpisodeLog l =
        run_episode(scene, library, std::cref(planner), config.camera, gripper, ep, "scene-" + std::to_string(s));
    log << l.scene_id << ": " << l.successes() << "/" << l.n_objects << " cleared in " << l.attempts.size()
        << " attempts, " << to_string(l.termination) << "\n";
    json e;
    e["scene"] = l.scene_id;
    e["objects"] = l.n_objects;
    e["termination"] = to_string(l.termination);
    e["attempts"] = json::array();
    for (const auto& a : l.attempts)
      e["attempts"].push_back({{"object", a.object}, {"success", a.success}, {"failure", a.failure}});
    episodes.push_back(e);
    logs.push_back(l);
  }
  const Rates rates = aggregate(logs, total);
  MetricReport packed;
  packed.environment = "packed";
  packed.success_rate = rates.success_rate;
  packed.declutter_rate = rates.declutter_rate;
  reports.push_back(packed);

  json rj = json::parse(report_to_json(reports));
  rj["seed"] = config.seed;
  rj["episodes"] = episodes;
  write_text_file(join(config.output, "report.json"), rj.dump(2) + "\n");
  write_text_file(join(config.output, "report.txt"), report_to_text(reports));
  log << report_to_text(reports);
  return reports;
}

void cmd_export_mesh(const RunConfig& config, const std::string& object_id, const std::string& path,
                     std::ostream& log) {
  const Checkpoint ck = load_checkpoint(config.checkpoint);
  const ReconstructedObject rec = decode_object(ck.decoder, ck.latents.at(object_id), config.grid);
  save_point_cloud_ply(path, rec.surface_points);
  log << object_id << ": " << rec.surface_points.size() << " surface points, " << rec.grasps.size()
      << " grasps; wrote " << path << "\n";
}

void cmd_inspect(const std::string& path, std::ostream& out) {
  if (fs::is_directory(path) || fs::path(path).filename() == kManifestName) {
    const std::string dir = fs::is_directory(path) ? path : fs::path(path).parent_path().string();
    const DatasetManifest m = load_manifest(dir);
    out << "dataset manifest, seed " << m.seed << ", " << m.objects.size() << " objects\n";
    for (const auto& o : m.objects)
      out << "  " << o.id << ": " << o.n_valid << "/" << o.n_candidates << " valid grasps, " << o.n_samples
          << " samples (mu " << o.provenance.mu << ", clearance " << o.provenance.clearance << ")\n";
    return;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  char head[5] = {};
  in.read(head, 5);
  const std::string magic(head, static_cast<std::size_t>(in.gcount()));
  in.close();
  if (magic.rfind("SGDF", 0) == 0) {
    const Checkpoint ck = load_checkpoint(path);
    const auto& a = ck.decoder.arch;
    out << "checkpoint version " << kCheckpointVersion << ", seed " << ck.seed << "\n"
        << "  latent_dim " << a.latent_dim << ", hidden_layers " << a.hidden_layers << ", width " << a.width
        << ", skip_layer " << a.skip_layer << ", dropout " << a.dropout << ", coord_scale " << a.coord_scale << "\n"
        << "  codes:";
    for (const auto& id : ck.latents.ids) out << ' ' << id;
    out << "\n";
  } else if (magic.rfind("GRSP", 0) == 0) {
    out << "grasp set, " << load_grasps(path).size() << " grasps\n";
  } else if (magic.rfind("SGDS", 0) == 0) {
    out << "sdf samples, " << load_samples(path).size() << " samples\n";
  } else if (magic.rfind("MAPS", 0) == 0) {
    const MapTensor m = load_map(path);
    out << "map tensor " << m.height << " x " << m.width << " x " << m.channels << "\n";
  } else if (magic.rfind("DPTH", 0) == 0) {
    const DepthImage d = read_depth_raw(path);
    out << "depth image " << d.width << " x " << d.height << "\n";
  } else {
    throw Error(ErrorCode::kBadMagic, "unrecognised file format: " + path);
  }
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfig:
    case ErrorCode::kIo:
    case ErrorCode::kBadMagic:
    case ErrorCode::kVersionMismatch:
      return 2;
    default:
      return 1;
  }
}

}  // namespace shapegrasp
