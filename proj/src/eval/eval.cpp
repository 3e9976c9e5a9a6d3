#include "shapegrasp/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "json.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/kdtree.hpp"
#include "shapegrasp/geometry/sdf.hpp"
#include "shapegrasp/geometry/voxel.hpp"

namespace shapegrasp {

namespace {

void require_clouds(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptyCloud, "chamfer needs two non-empty clouds");
}

double directed_mean(const PointCloud& from, const KdTree& to) {
  double sum = 0.0;
  for (const auto& p : from.points) sum += std::sqrt(to.nearest(p).distance2);
  return sum / static_cast<double>(from.size());
}

double directed_mean_brute(const PointCloud& from, const PointCloud& to) {
  double sum = 0.0;
  for (const auto& p : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to.points) best = std::min(best, (q - p).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_clouds(a, b);
  const KdTree ta(a.points), tb(b.points);
  return 1000.0 * (directed_mean(a, tb) + directed_mean(b, ta));
}

double chamfer_brute_force(const PointCloud& a, const PointCloud& b) {
  require_clouds(a, b);
  return 1000.0 * (directed_mean_brute(a, b) + directed_mean_brute(b, a));
}

double iou3d(const PointCloud& a, const PointCloud& b, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "IoU spacing must be positive");
  Box3 box;
  for (const auto& p : a.points) box.extend(p);
  for (const auto& p : b.points) box.extend(p);
  if (box.isEmpty()) throw Error(ErrorCode::kEmptyUnion, "IoU of two empty clouds");
  const VoxelGridSpec spec = grid_covering(box, spacing);
  VoxelGrid va = voxelize(a, spec), vb = voxelize(b, spec);
  fill_columns_z(va);
  fill_columns_z(vb);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < va.occupancy.size(); ++i) {
    const bool x = va.occupancy[i] != 0, y = vb.occupancy[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  if (uni == 0) throw Error(ErrorCode::kEmptyUnion, "IoU union is empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool analytic_success(const IndexedMesh& mesh, const Pose& pose, const Grasp& grasp, const GripperModel& gripper,
                      double mu, double clearance) {
  const Grasp local{pose.inverse() * grasp.pose, Frame::kObject};
  return check_antipodal(mesh, local, gripper, mu).valid && !check_collision_mesh(mesh, local, gripper, clearance);
}

bool analytic_success(const TriMesh& mesh, const Pose& pose, const Grasp& grasp, const GripperModel& gripper,
                      double mu, double clearance) {
  return analytic_success(IndexedMesh(mesh), pose, grasp, gripper, mu, clearance);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kCleared:
      return "cleared";
    case Termination::kThreeConsecutiveFailures:
      return "three-consecutive-failures";
    case Termination::kNoGraspPredicted:
      return "no-grasp-predicted";
  }
  return "unknown";
}

std::size_t EpisodeLog::successes() const {
  return static_cast<std::size_t>(
      std::count_if(attempts.begin(), attempts.end(), [](const Attempt& a) { return a.success; }));
}

EpisodeLog run_episode(const SceneRecord& scene, const std::vector<ObjectRecord>& library, const Planner& planner,
                       const SceneCamera& camera, const GripperModel& gripper, const EpisodeParams& params,
                       const std::string& scene_id) {
  if (scene.objects.empty()) throw Error(ErrorCode::kInvalidArgument, "episode scene has no objects");
  EpisodeLog log;
  log.scene_id = scene_id;
  log.n_objects = scene.objects.size();

  std::map<std::string, std::shared_ptr<IndexedMesh>> meshes;
  for (const auto& o : scene.objects)
    if (!meshes.count(o.object_id))
      meshes[o.object_id] = std::make_shared<IndexedMesh>(find_object(library, o.object_id).mesh);
  const IndexedMesh table(table_mesh());

  std::vector<bool> removed(scene.objects.size(), false);
  std::vector<int> failures(scene.objects.size(), 0);
  int consecutive = 0;
  const Vec3 centre_local = gripper.grasp_center();

  for (;;) {
    std::vector<int> remaining;
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
      if (!removed[i]) remaining.push_back(static_cast<int>(i));
    if (remaining.empty()) {
      log.termination = Termination::kCleared;
      break;
    }
    SceneRecord current = scene;
    current.objects.clear();
    for (int i : remaining) current.objects.push_back(scene.objects[i]);
    const RenderResult observation = render_scene(current, library, camera, params.depth_noise);
    const std::vector<Grasp> ranked = planner(current, observation);

    // First grasp whose target object is still eligible.
    std::optional<Attempt> attempt;
    for (const auto& g : ranked) {
      Grasp world = g;
      if (g.frame == Frame::kCamera) world = Grasp{camera.pose * g.pose, Frame::kWorld};
      const Vec3 centre = world.pose.apply(centre_local);
      int target = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i : remaining) {
        const auto& o = scene.objects[i];
        const double d = std::abs(mesh_sdf(*meshes.at(o.object_id), o.pose.inverse().apply(centre)));
        if (d < best) {
          best = d;
          target = i;
        }
      }
      if (target >= 0 && failures[target] >= params.max_failures_per_object) continue;
      Attempt a;
      a.object = target;
      a.grasp = world;
      attempt = a;
      break;
    }
    if (!attempt) {
      log.termination = Termination::kNoGraspPredicted;
      break;
    }

    Attempt& a = *attempt;
    const auto& target = scene.objects[a.object];
    const IndexedMesh& target_mesh = *meshes.at(target.object_id);
    const Grasp local{target.pose.inverse() * a.grasp.pose, Frame::kObject};
    if (!check_antipodal(target_mesh, local, gripper, params.mu).valid) {
      a.failure = "not antipodal";
    } else if (check_collision_mesh(target_mesh, local, gripper, params.clearance)) {
      a.failure = "collides with target";
    } else if (check_collision_mesh(table, Grasp{a.grasp.pose, Frame::kWorld}, gripper, params.clearance)) {
      a.failure = "collides with table";
    } else {
      for (int i : remaining) {
        if (i == a.object) continue;
        const auto& o = scene.objects[i];
        const Grasp other{o.pose.inverse() * a.grasp.pose, Frame::kObject};
        if (check_collision_mesh(*meshes.at(o.object_id), other, gripper, params.clearance)) {
          a.failure = "collides with object " + std::to_string(i);
          break;
        }
      }
    }
    a.success = a.failure.empty();
    log.attempts.push_back(a);
    if (a.success) {
      removed[a.object] = true;
      consecutive = 0;
    } else {
      ++failures[a.object];
      if (++consecutive >= params.max_consecutive_failures) {
        log.termination = Termination::kThreeConsecutiveFailures;
        break;
      }
    }
  }
  return log;
}

Rates aggregate(const std::vector<EpisodeLog>& logs, std::size_t total_objects) {
  if (total_objects == 0) throw Error(ErrorCode::kInvalidArgument, "total_objects must be positive");
  Rates r;
  r.objects = total_objects;
  for (const auto& l : logs) {
    r.attempts += l.attempts.size();
    r.successes += l.successes();
  }
  if (r.attempts > 0) r.success_rate = static_cast<double>(r.successes) / static_cast<double>(r.attempts);
  r.declutter_rate = static_cast<double>(r.successes) / static_cast<double>(total_objects);
  return r;
}

std::map<double, double> quality_sweep(const std::vector<Grasp>& ranked, const IndexedMesh& mesh, const Pose& pose,
                                       const std::vector<double>& mu_list, const GripperModel& gripper, int k,
                                       double clearance) {
  if (ranked.empty()) throw Error(ErrorCode::kEmptyList, "quality sweep needs at least one grasp");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "quality sweep k must be positive");
  const std::size_t n = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::map<double, double> out;
  for (double mu : mu_list) {
    std::size_t pass = 0;
    for (std::size_t i = 0; i < n; ++i) pass += analytic_success(mesh, pose, ranked[i], gripper, mu, clearance);
    out[mu] = static_cast<double>(pass) / static_cast<double>(n);
  }
  return out;
}

namespace {

std::string mu_label(double mu) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", mu);
  return buf;
}

std::string cell(const std::optional<double>& v, const char* fmt) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::string report_to_json(const std::vector<MetricReport>& reports) {
  nlohmann::json j;
  j["chamfer_convention"] = "sum of directed mean L2 distances, mm";
  j["ap_convention"] = "simplified-AP";
  nlohmann::json rows = nlohmann::json::array();
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  for (const auto& r : reports) {
    nlohmann::json row;
    row["environment"] = r.environment;
    row["chamfer_mm"] = opt(r.chamfer_mm);
    row["iou"] = opt(r.iou);
    row["success_rate"] = opt(r.success_rate);
    row["declutter_rate"] = opt(r.declutter_rate);
    nlohmann::json ap = nlohmann::json::object();
    for (const auto& [mu, p] : r.ap_per_mu) ap[mu_label(mu)] = p;
    row["simplified_ap"] = ap;
    rows.push_back(row);
  }
  j["reports"] = rows;
  return j.dump(2);
}

std::string report_to_text(const std::vector<MetricReport>& reports) {
  std::vector<double> mus;
  for (const auto& r : reports)
    for (const auto& [mu, p] : r.ap_per_mu)
      if (std::find(mus.begin(), mus.end(), mu) == mus.end()) mus.push_back(mu);
  std::sort(mus.begin(), mus.end());

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"environment", "CD[mm]", "IoU", "SR", "DR"};
  for (double mu : mus) header.push_back("sAP@" + mu_label(mu));
  table.push_back(header);
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.environment, cell(r.chamfer_mm, "%.2f"), cell(r.iou, "%.3f"),
                                    cell(r.success_rate, "%.3f"), cell(r.declutter_rate, "%.3f")};
    for (double mu : mus) {
      const auto it = r.ap_per_mu.find(mu);
      row.push_back(it == r.ap_per_mu.end() ? "-" : cell(it->second, "%.3f"));
    }
    table.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out = "# CD: sum of directed mean L2 distances (mm); sAP: simplified-AP, top-k precision\n";
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cellv = row[c];
      if (c == 0)
        cellv += std::string(width[c] - row[c].size(), ' ');
      else
        cellv = std::string(width[c] - row[c].size(), ' ') + cellv;
      out += cellv;
      out += c + 1 < row.size() ? "  " : "\n";
    }
  }
  return out;
}

}  // namespace shapegrasp
