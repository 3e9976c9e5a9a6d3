#include "shapegrasp/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "json.hpp"

#include "shapegrasp/error.hpp"

namespace shapegrasp {

void GridSpec::validate() const {
  if (resolution < 8) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be at least 8");
  if (bounds.isEmpty() || !((bounds.max() - bounds.min()).array() > 0.0).all())
    throw Error(ErrorCode::kInvalidArgument, "grid bounds are degenerate");
  if (!std::isfinite(epsilon)) throw Error(ErrorCode::kInvalidArgument, "grid epsilon must be finite");
}

Vec3 GridSpec::spacing() const { return (bounds.max() - bounds.min()) / static_cast<double>(resolution - 1); }

double GridSpec::band() const { return epsilon >= 0.0 ? epsilon : 0.5 * spacing().minCoeff(); }

Vec3 GridSpec::point(int i, int j, int k) const {
  return bounds.min() + spacing().cwiseProduct(Vec3(i, j, k));
}

std::size_t GridSpec::point_count() const {
  const auto r = static_cast<std::size_t>(resolution);
  return r * r * r;
}

namespace {

// Cell hash for the translation bound of the deduplication.
struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Vec3& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)), static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

bool same_grasp(const Grasp& a, const Grasp& b, const DedupParams& params) {
  if ((a.pose.translation - b.pose.translation).norm() > params.translation) return false;
  if (rotation_angle(a.pose.rotation, b.pose.rotation) <= params.rotation) return true;
  return rotation_angle(a.pose.rotation, flip(b).pose.rotation) <= params.rotation;
}

Grasp to_camera(const Grasp& g, const Pose& pose) {
  return Grasp{pose * g.pose, Frame::kCamera};
}

}  // namespace

std::vector<Grasp> dedup_grasps(const std::vector<Grasp>& grasps, const DedupParams& params) {
  std::vector<Grasp> kept;
  if (grasps.empty()) return kept;
  const double cell = std::max(params.translation, 1e-9);
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells;
  for (const auto& g : grasps) {
    const CellKey c = cell_of(g.pose.translation, cell);
    bool duplicate = false;
    for (std::int64_t dx = -1; dx <= 1 && !duplicate; ++dx)
      for (std::int64_t dy = -1; dy <= 1 && !duplicate; ++dy)
        for (std::int64_t dz = -1; dz <= 1 && !duplicate; ++dz) {
          const auto it = cells.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) continue;
          for (std::size_t k : it->second)
            if (same_grasp(g, kept[k], params)) {
              duplicate = true;
              break;
            }
        }
    if (duplicate) continue;
    cells[c].push_back(kept.size());
    kept.push_back(g);
  }
  return kept;
}

ReconstructedObject decode_object(const SgdfDecoder& decoder, const LatentCode& code, const GridSpec& grid,
                                  const DedupParams& dedup) {
  grid.validate();
  if (code.size() != decoder.arch.latent_dim)
    throw Error(ErrorCode::kDimensionMismatch, "latent code does not match the decoder");
  const double eps = grid.band();
  const int r = grid.resolution;
  const VecX<float> z = code.cast<float>();

  struct BandPoint {
    Vec3 x;
    double s;
    Vec3 dt, r1, r2;
  };
  std::vector<BandPoint> band;
  constexpr std::size_t kChunk = 8192;
  const std::size_t total = grid.point_count();
  Mat3X<float> x(3, static_cast<Eigen::Index>(std::min(kChunk, total)));
  std::vector<Vec3> pts;
  pts.reserve(kChunk);
  for (std::size_t begin = 0; begin < total; begin += kChunk) {
    const std::size_t n = std::min(kChunk, total - begin);
    pts.clear();
    for (std::size_t idx = begin; idx < begin + n; ++idx) {
      const int i = static_cast<int>(idx / (static_cast<std::size_t>(r) * r));
      const int j = static_cast<int>((idx / r) % r);
      const int k = static_cast<int>(idx % r);
      pts.push_back(grid.point(i, j, k));
    }
    x.resize(3, static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) x.col(static_cast<Eigen::Index>(c)) = pts[c].cast<float>();
    const MatX<float> out = forward_batch<float>(decoder, z, x);
    for (std::size_t c = 0; c < n; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      const double s = out(0, col);
      if (!(std::abs(s) <= eps)) continue;
      const Eigen::VectorXd o = out.col(col).cast<double>();
      band.push_back({x.col(col).cast<double>(), s, o.segment<3>(1), o.segment<3>(4), o.segment<3>(7)});
    }
  }
  if (band.empty())
    throw Error(ErrorCode::kEmptyReconstruction, "no grid point lies within the iso band");

  ReconstructedObject rec;
  rec.band_points = band.size();
  rec.surface_points.points.reserve(band.size());
  Vec3 sum = Vec3::Zero();
  for (const auto& b : band) {
    rec.surface_points.points.push_back(b.x);
    sum += b.x;
  }
  rec.centroid = sum / static_cast<double>(band.size());

  std::vector<std::size_t> order(band.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(band[a].s) < std::abs(band[b].s); });
  std::vector<Grasp> raw;
  raw.reserve(band.size());
  for (std::size_t i : order) {
    const auto& b = band[i];
    try {
      raw.push_back(decode_grasp(b.x, b.dt, b.r1, b.r2));
    } catch (const Error&) {
      // degenerate rotation outputs carry no grasp
    }
  }
  rec.grasps = dedup_grasps(raw, dedup);
  return rec;
}

DecodeCache::DecodeCache(const SgdfDecoder& decoder, GridSpec grid, DedupParams dedup)
    : decoder_(&decoder), grid_(std::move(grid)), dedup_(dedup) {
  grid_.validate();
}

std::shared_ptr<const ReconstructedObject> DecodeCache::get(const LatentCode& code) {
  std::vector<double> key(code.data(), code.data() + code.size());
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto rec = std::make_shared<const ReconstructedObject>(decode_object(*decoder_, code, grid_, dedup_));
  cache_.emplace(std::move(key), rec);
  return rec;
}

void estimate_normals(PointCloud& cloud, const Vec3& viewpoint, int k) {
  cloud.normals.assign(cloud.points.size(), Vec3::UnitZ());
  if (cloud.points.size() < 3) return;
  const KdTree tree(cloud.points);
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 3)), cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto nbrs = tree.knn(cloud.points[i], kk);
    Vec3 mean = Vec3::Zero();
    for (const auto& n : nbrs) mean += tree.point(n.index);
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nbrs) {
      const Vec3 d = tree.point(n.index) - mean;
      cov += d * d.transpose();
    }
    Vec3 normal = Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvectors().col(0);
    if (normal.dot(viewpoint - cloud.points[i]) < 0.0) normal = -normal;
    cloud.normals[i] = normal;
  }
}

IcpResult refine_pose_icp(const PointCloud& model, const PointCloud& observed, const Pose& init,
                          const IcpParams& params) {
  if (observed.empty()) throw Error(ErrorCode::kEmptyCloud, "observed cloud is empty");
  return refine_pose_icp(model, observed, KdTree(observed.points), init, params);
}

IcpResult refine_pose_icp(const PointCloud& model, const PointCloud& observed, const KdTree& tree, const Pose& init,
                          const IcpParams& params) {
  if (model.empty() || observed.empty()) throw Error(ErrorCode::kEmptyCloud, "ICP needs two non-empty clouds");
  if (!observed.has_normals()) throw Error(ErrorCode::kInvalidArgument, "observed cloud has no normals");
  if (tree.size() != observed.size()) throw Error(ErrorCode::kDimensionMismatch, "tree does not index the cloud");

  IcpResult result;
  result.pose = init;
  double cutoff = params.initial_cutoff;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;

  // Accumulates the point-to-plane system at `pose`; returns the pair count.
  const auto accumulate = [&](const Pose& pose, double cut, Mat6& a, Vec6& b, double& sq) {
    a.setZero();
    b.setZero();
    sq = 0.0;
    std::size_t n = 0;
    const double cut2 = cut * cut;
    for (const auto& p : model.points) {
      const Vec3 q = pose.apply(p);
      const Neighbor nb = tree.nearest(q);
      if (nb.distance2 > cut2) continue;
      const Vec3& normal = observed.normals[nb.index];
      const double r = (q - tree.point(nb.index)).dot(normal);
      Vec6 j;
      j << q.cross(normal), normal;
      a.noalias() += j * j.transpose();
      b.noalias() -= j * r;
      sq += r * r;
      ++n;
    }
    return n;
  };

  Mat6 a;
  Vec6 b;
  double sq = 0.0;
  for (int it = 0; it < params.max_iterations; ++it) {
    const std::size_t n = accumulate(result.pose, cutoff, a, b, sq);
    if (n < params.min_correspondences)
      throw Error(ErrorCode::kTooFewCorrespondences,
                  "ICP found " + std::to_string(n) + " correspondences within " + std::to_string(cutoff) + " m");
    result.correspondences = n;
    result.residual = std::sqrt(sq / static_cast<double>(n));
    result.iterations = it + 1;
    const double ridge = 1e-12 * std::max(a.trace(), 1e-30);
    const Vec6 x = (a + ridge * Mat6::Identity()).ldlt().solve(b);
    if (!x.allFinite()) break;
    const Vec3 w = x.head<3>();
    const double angle = w.norm();
    Pose delta;
    if (angle > 0.0) delta.rotation = axis_angle(w / angle, angle);
    delta.translation = x.tail<3>();
    result.pose = delta * result.pose;
    result.pose.rotation = procrustes_project(result.pose.rotation);
    cutoff = std::max(params.min_cutoff, cutoff * params.cutoff_decay);
    if (x.norm() < params.tolerance) break;
  }
  const std::size_t n = accumulate(result.pose, cutoff, a, b, sq);
  if (n >= params.min_correspondences) {
    result.correspondences = n;
    result.residual = std::sqrt(sq / static_cast<double>(n));
  }
  return result;
}

std::vector<Grasp> filter_grasps(const std::vector<Grasp>& grasps, const KdTree& scene, const GripperModel& gripper,
                                 double clearance) {
  std::vector<Grasp> out;
  for (const auto& g : grasps)
    if (scene.empty() || !check_collision_points(scene, g, gripper, clearance)) out.push_back(g);
  return out;
}

std::vector<Grasp> filter_grasps(const std::vector<Grasp>& grasps, const PointCloud& scene,
                                 const GripperModel& gripper, double clearance) {
  return filter_grasps(grasps, KdTree(scene.points), gripper, clearance);
}

GraspChoice select_grasp(const std::vector<Grasp>& grasps, const Vec3& centroid, const Vec3& gravity_dir) {
  if (grasps.empty()) throw Error(ErrorCode::kEmptyList, "no grasps to select from");
  const double gn = gravity_dir.norm();
  if (!(gn > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gravity direction must be non-zero");
  const Vec3 g = gravity_dir / gn;
  GraspChoice best{grasps[0], 0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const double torque = (centroid - grasps[i].pose.translation).cross(g).norm();
    if (torque < best.torque) best = {grasps[i], i, torque};
  }
  return best;
}

SceneObservation make_observation(const DepthImage& depth, const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  SceneObservation obs;
  obs.depth = depth;
  obs.intrinsics = intrinsics;
  obs.cloud = backproject(depth, intrinsics).cloud;
  estimate_normals(obs.cloud);
  obs.tree = KdTree(obs.cloud.points);
  return obs;
}

namespace {

// Model points in front of or on the observed surface at their pixel.
PointCloud visible_points(const PointCloud& canonical, const Pose& pose, const SceneObservation& obs, double tol) {
  PointCloud out;
  const auto& k = obs.intrinsics;
  for (const auto& p : canonical.points) {
    const Vec3 c = pose.apply(p);
    if (c.z() <= 0.0) continue;
    const int u = static_cast<int>(std::floor(k.fx * c.x() / c.z() + k.cx));
    const int v = static_cast<int>(std::floor(k.fy * c.y() / c.z() + k.cy));
    if (u < 0 || v < 0 || u >= obs.depth.width || v >= obs.depth.height || !obs.depth.valid(u, v)) continue;
    if (c.z() <= obs.depth.at(u, v) + tol) out.points.push_back(p);
  }
  return out;
}

}  // namespace

PlanResult plan(const std::vector<Detection>& detections, DecodeCache& cache, const SceneObservation& observation,
                const GripperModel& gripper, const PlanParams& params) {
  PlanResult result;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    PlannedObject obj;
    obj.detection = d;
    obj.initial_pose = detections[d].pose;
    obj.pose = detections[d].pose;
    try {
      obj.shape = cache.get(detections[d].code);
    } catch (const Error& e) {
      obj.message = e.what();
      result.objects.push_back(std::move(obj));
      continue;
    }
    const ReconstructedObject& shape = *obj.shape;
    if (params.refine && !observation.cloud.empty()) {
      const PointCloud model = visible_points(shape.surface_points, obj.initial_pose, observation,
                                              params.visibility_tolerance);
      try {
        if (model.empty()) throw Error(ErrorCode::kTooFewCorrespondences, "no visible model points");
        const IcpResult icp =
            refine_pose_icp(model, observation.cloud, observation.tree, obj.initial_pose, params.icp);
        obj.pose = icp.pose;
        obj.icp_ok = true;
        obj.icp_residual = icp.residual;
      } catch (const Error& e) {
        obj.icp_message = e.what();
      }
    }
    obj.centroid = obj.pose.apply(shape.centroid);
    std::vector<Grasp> grasps;
    grasps.reserve(shape.grasps.size());
    for (const auto& g : shape.grasps) grasps.push_back(to_camera(g, obj.pose));
    obj.decoded = grasps.size();
    const std::vector<Grasp> survivors = filter_grasps(grasps, observation.tree, gripper, params.clearance);
    obj.survivors = survivors.size();
    if (!survivors.empty())
      obj.choice = select_grasp(survivors, obj.centroid, params.gravity);
    else
      obj.message = "no grasp survived the collision filter";
    result.decoded += obj.decoded;
    result.survivors += obj.survivors;
    result.selected += obj.choice ? 1 : 0;
    result.objects.push_back(std::move(obj));
  }
  for (std::size_t i = 0; i < result.objects.size(); ++i)
    if (result.objects[i].choice) result.ranking.push_back(i);
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](std::size_t a, std::size_t b) {
    return result.objects[a].choice->torque < result.objects[b].choice->torque;
  });
  return result;
}

namespace {

nlohmann::json pose_json(const Pose& p) {
  nlohmann::json a = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(p.rotation(r, c));
    a.push_back(p.translation(r));
  }
  return a;
}

}  // namespace

std::string plan_to_json(const PlanResult& result) {
  nlohmann::json j;
  j["frame"] = "camera";
  j["stage_counts"] = {{"decoded", result.decoded}, {"survivors", result.survivors}, {"selected", result.selected}};
  j["ranking"] = result.ranking;
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : result.objects) {
    nlohmann::json e;
    e["detection"] = o.detection;
    e["initial_pose"] = pose_json(o.initial_pose);
    e["pose"] = pose_json(o.pose);
    e["icp_ok"] = o.icp_ok;
    e["icp_residual"] = o.icp_residual;
    if (!o.icp_message.empty()) e["icp_message"] = o.icp_message;
    e["centroid"] = {o.centroid.x(), o.centroid.y(), o.centroid.z()};
    e["decoded"] = o.decoded;
    e["survivors"] = o.survivors;
    if (o.choice) {
      e["grasp"] = pose_json(o.choice->grasp.pose);
      e["score"] = o.choice->torque;
    } else {
      e["grasp"] = nullptr;
    }
    if (!o.message.empty()) e["message"] = o.message;
    objs.push_back(std::move(e));
  }
  j["objects"] = std::move(objs);
  return j.dump(2);
}

void write_plan_ply(const std::string& path, const PlanResult& result) {
  struct Vertex {
    Vec3 p;
    std::array<int, 3> rgb;
  };
  std::vector<Vertex> vertices;
  std::vector<std::array<std::size_t, 2>> edges;
  for (const auto& o : result.objects) {
    if (o.shape)
      for (const auto& p : o.shape->surface_points.points) vertices.push_back({o.pose.apply(p), {180, 180, 180}});
    if (!o.choice) continue;
    const Pose& g = o.choice->grasp.pose;
    const std::array<std::array<int, 3>, 3> colours = {{{255, 0, 0}, {0, 255, 0}, {0, 0, 255}}};
    for (int axis = 0; axis < 3; ++axis) {
      const std::size_t base = vertices.size();
      vertices.push_back({g.translation, colours[axis]});
      vertices.push_back({g.translation + 0.05 * g.rotation.col(axis), colours[axis]});
      edges.push_back({base, base + 1});
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << vertices.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\n"
         "property uchar blue\nelement edge "
      << edges.size() << "\nproperty int vertex1\nproperty int vertex2\nend_header\n";
  for (const auto& v : vertices)
    out << v.p.x() << ' ' << v.p.y() << ' ' << v.p.z() << ' ' << v.rgb[0] << ' ' << v.rgb[1] << ' ' << v.rgb[2]
        << '\n';
  for (const auto& e : edges) out << e[0] << ' ' << e[1] << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace shapegrasp
