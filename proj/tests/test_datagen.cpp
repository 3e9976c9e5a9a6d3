#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/datagen/dataset_io.hpp"
#include "shapegrasp/datagen/labels.hpp"
#include "shapegrasp/datagen/library.hpp"
#include "shapegrasp/datagen/scene.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/primitives.hpp"
#include "shapegrasp/geometry/sdf.hpp"

using namespace shapegrasp;

namespace {

const GripperModel kGripper = GripperModel::default_model();

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("shapegrasp_test_" + name);
  std::filesystem::create_directories(p);
  return p.string();
}

GraspSet labelled(const ObjectRecord& obj, std::size_t n_points, std::uint64_t seed) {
  const IndexedMesh im(obj.mesh);
  const auto c = generate_candidates(obj.mesh, kGripper, n_points, 24, seed);
  return label_valid_grasps(im, c, kGripper, {n_points, 24, 0.5, 0.003}, obj.id);
}

double min_world_z(const ObjectRecord& obj, const Pose& pose) {
  double z = std::numeric_limits<double>::infinity();
  for (const auto& v : obj.mesh.vertices) z = std::min(z, pose.apply(v).z());
  return z;
}

}  // namespace

TEST_CASE("candidate counts and alignment") {
  const TriMesh box = make_box(Vec3(0.05, 0.04, 0.09));
  CHECK(generate_candidates(box, kGripper, 1000, 24, 0).size() == 24000);

  const auto one = generate_candidates(box, kGripper, 1, 1, 3);
  REQUIRE(one.size() == 1);
  const Vec3 approach = one[0].pose.rotation.col(2);
  const Vec3 surface_point = one[0].pose.translation + kGripper.finger_depth * approach;
  const IndexedMesh im(box);
  const auto cp = im.closest(surface_point);
  CHECK(cp.distance2 < 1e-18);
  CHECK(approach.dot(box.normals[cp.triangle]) == doctest::Approx(-1.0).epsilon(1e-6));

  const auto set = generate_candidates(make_cylinder(0.02, 0.09), kGripper, 20, 24, 5);
  for (std::size_t p = 0; p < 20; ++p) {
    for (std::size_t k = 0; k + 1 < 24; ++k) {
      const Mat3& a = set[p * 24 + k].pose.rotation;
      const Mat3& b = set[p * 24 + k + 1].pose.rotation;
      CHECK((a.transpose() * b - rot_z(M_PI / 12)).norm() < 1e-9);
      CHECK(set[p * 24 + k].pose.translation == set[p * 24 + k + 1].pose.translation);
    }
  }
  CHECK_THROWS_AS(generate_candidates(TriMesh{}, kGripper, 10, 24, 0), Error);
}

TEST_CASE("labelling matches a brute-force re-check") {
  const TriMesh plate = make_box(Vec3(0.06, 0.06, 0.01));
  const IndexedMesh im(plate);
  const auto candidates = generate_candidates(plate, kGripper, 200, 24, 9);
  const GraspSet set = label_valid_grasps(im, candidates, kGripper, {200, 24, 0.5, 0.003}, "plate");
  std::vector<Grasp> brute;
  for (const auto& g : candidates) {
    const bool ok = check_antipodal(plate, g, kGripper, 0.5).valid && !check_collision_mesh(plate, g, kGripper, 0.003);
    if (ok) brute.push_back(g);
  }
  REQUIRE(set.grasps.size() == brute.size());
  CHECK(!brute.empty());
  for (std::size_t i = 0; i < brute.size(); ++i) CHECK(set.grasps[i].pose.matrix() == brute[i].pose.matrix());
}

TEST_CASE("cube wider than the gripper has no valid grasps") {
  const TriMesh cube = make_box(Vec3(0.2, 0.2, 0.2));
  set_warnings_enabled(false);
  const GraspSet set = label_valid_grasps(IndexedMesh(cube), generate_candidates(cube, kGripper, 300, 24, 1),
                                          kGripper, {300, 24, 0.5, 0.003});
  set_warnings_enabled(true);
  CHECK(set.grasps.empty());
}

TEST_CASE("built-in library yields thousands of grasps that re-validate") {
  std::vector<std::size_t> counts;
  for (const auto& obj : builtin_library()) {
    CHECK(obj.mesh.watertight);
    const GraspSet set = labelled(obj, 1000, 11);
    counts.push_back(set.grasps.size());
    CHECK(!set.grasps.empty());
    for (std::size_t i = 0; i < set.grasps.size(); i += 7) {
      CHECK(check_antipodal(obj.mesh, set.grasps[i], kGripper, set.provenance.mu).valid);
      CHECK_FALSE(check_collision_mesh(obj.mesh, set.grasps[i], kGripper, set.provenance.clearance));
    }
  }
  std::sort(counts.begin(), counts.end());
  CHECK(counts[counts.size() / 2] >= 1000);
  CHECK(counts.back() < 24000);
}

TEST_CASE("sdf samples and nearest-grasp labels") {
  const ObjectRecord obj = builtin_object("box_tall");
  const IndexedMesh im(obj.mesh);
  const GraspSet set = labelled(obj, 300, 2);
  REQUIRE(!set.grasps.empty());

  // A point on a grasp translation is labelled with the first grasp there.
  const Grasp& g = set.grasps[5];
  std::size_t first = 0;
  while (set.grasps[first].pose.translation != g.pose.translation) ++first;
  const auto at = label_points(im, set, std::vector<Vec3>{g.pose.translation});
  CHECK(at[0].delta_t == Vec3::Zero());
  CHECK(at[0].rotation == set.grasps[first].pose.rotation);

  const auto samples = sample_sgdf(im, set, 1000, 4);
  REQUIRE(samples.size() == 1000);
  int inside = 0;
  for (const auto& s : samples) {
    // Exhaustive nearest grasp, ties to the lowest index.
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.grasps.size(); ++i) {
      const double d = (set.grasps[i].pose.translation - s.x).squaredNorm();
      if (d < bd) bd = d, best = i;
    }
    CHECK(s.x + s.delta_t == set.grasps[best].pose.translation);
    CHECK(s.rotation == set.grasps[best].pose.rotation);
    CHECK(make_transform(s.x + s.delta_t, s.rotation).matrix() == set.grasps[best].pose.matrix());
    CHECK(s.s == mesh_sdf(im, s.x));
    inside += s.s < 0;
  }
  CHECK(inside > 100);
  CHECK(inside < 900);

  const auto again = sample_sgdf(im, set, 1000, 4);
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(again[i].x == samples[i].x);
  CHECK(sample_sgdf(im, set, 100000, 5).size() == 100000);

  GraspSet empty;
  CHECK_THROWS_AS(sample_sgdf(im, empty, 10, 0), Error);
}

TEST_CASE("near-surface and box sampling proportions") {
  const ObjectRecord obj = builtin_object("box_square");
  const IndexedMesh im(obj.mesh);
  const GraspSet set = labelled(obj, 100, 3);
  const auto samples = sample_sgdf(im, set, 5000, 8);
  const Box3 b = obj.mesh.bounds();
  const Vec3 half = 0.75 * b.sizes();
  for (std::size_t i = 4000; i < 5000; ++i) {
    CHECK((samples[i].x - b.center()).cwiseAbs().maxCoeff() <= half.maxCoeff() + 1e-9);
  }
  double near_abs = 0;
  for (std::size_t i = 0; i < 4000; ++i) near_abs += std::abs(samples[i].s);
  // |N(0, sigma)| projected on the normal has mean sigma * sqrt(2 / pi).
  CHECK(near_abs / 4000 < 0.025);
}

TEST_CASE("clipped Poisson object counts") {
  SceneParams params;
  Rng rng(123);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = sample_object_count(rng, params);
    CHECK(n >= 1);
    CHECK(n <= 6);
    sum += n;
  }
  // Oracle: sum over k of min(max(k, 1), 6) * P(k), evaluated directly.
  double oracle = 0, pk = std::exp(-4.0);
  for (int k = 0; k < 60; ++k) {
    oracle += std::min(std::max(k, 1), 6) * pk;
    pk *= 4.0 / (k + 1);
  }
  CHECK(clipped_poisson_mean(params) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(sum / 10000 - oracle) < 0.1);
}

TEST_CASE("packed scenes") {
  const auto library = builtin_library();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneRecord s = make_packed_scene(library, seed);
    CHECK(!s.objects.empty());
    CHECK(s.objects.size() <= 6);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const auto& oi = find_object(library, s.objects[i].object_id);
      CHECK(is_rotation(s.objects[i].pose.rotation));
      CHECK(s.objects[i].pose.rotation.col(2).isApprox(Vec3::UnitZ()));
      // Resting on the table.
      CHECK(std::abs(min_world_z(oi, s.objects[i].pose)) < 1e-12);
      for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
        const auto& oj = find_object(library, s.objects[j].object_id);
        const double d = (s.objects[i].pose.translation - s.objects[j].pose.translation).head<2>().norm();
        CHECK(d >= oi.footprint_radius + oj.footprint_radius);
      }
    }
  }
  const SceneRecord a = make_packed_scene(library, 42), b = make_packed_scene(library, 42);
  REQUIRE(a.objects.size() == b.objects.size());
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    CHECK(a.objects[i].object_id == b.objects[i].object_id);
    CHECK(a.objects[i].pose.matrix() == b.objects[i].pose.matrix());
  }
}

TEST_CASE("render_labels") {
  std::vector<ObjectRecord> library = {make_object_record("ball", make_icosphere(0.03, 3)),
                                       make_object_record("block", make_box(Vec3(0.04, 0.04, 0.06)))};
  std::map<std::string, LatentCode> codes;
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g;
  for (const auto& o : library) {
    LatentCode c(kLatentDim);
    for (int i = 0; i < kLatentDim; ++i) c[i] = g(rng);
    codes[o.id] = c;
  }
  SceneCamera cam;

  SUBCASE("single sphere peaks at its mask centre") {
    SceneRecord scene;
    scene.objects.push_back({"ball", make_transform(Vec3(0, 0, 0.03), Mat3::Identity())});
    const auto out = render_labels(scene, library, cam, codes);
    const auto& L = out.labels;
    std::vector<std::array<int, 2>> mask;
    for (int v = 0; v < L.height; ++v)
      for (int u = 0; u < L.width; ++u)
        if (L.instance_masks[L.pixel(u, v)] == 0) mask.push_back({u, v});
    REQUIRE(!mask.empty());
    const MaskGaussian mg = fit_mask_gaussian(mask);
    CHECK(*std::max_element(L.heatmap.begin(), L.heatmap.end()) == 1.0f);
    CHECK(L.heatmap[L.pixel(mg.u, mg.v)] == 1.0f);
    double cu = 0, cv = 0;
    for (const auto& p : mask) cu += p[0], cv += p[1];
    CHECK(std::abs(mg.u - cu / mask.size()) <= 1.0);
    CHECK(std::abs(mg.v - cv / mask.size()) <= 1.0);

    const Pose truth = camera_frame_pose(cam, scene.objects[0].pose);
    for (const auto& p : mask) {
      const std::size_t i = L.pixel(p[0], p[1]);
      Mat3 m;
      Vec3 t;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m(r, c) = L.pose_map[i * 12 + r * 4 + c];
        t[r] = L.pose_map[i * 12 + r * 4 + 3];
      }
      CHECK((procrustes_project(m) - truth.rotation).norm() < 1e-6);
      CHECK((t - truth.translation).norm() < 1e-6);
      for (int c = 0; c < kLatentDim; ++c) CHECK(L.code_map[i * kLatentDim + c] == static_cast<float>(codes["ball"][c]));
    }
    // Background pixels are zero in the pose and code maps.
    for (std::size_t i = 0; i < L.instance_masks.size(); ++i) {
      if (L.instance_masks[i] >= 0) continue;
      CHECK(L.pose_map[i * 12] == 0.0f);
      CHECK(L.code_map[i * kLatentDim] == 0.0f);
    }
  }

  SUBCASE("two disjoint objects give two maxima") {
    SceneRecord scene;
    scene.objects.push_back({"ball", make_transform(Vec3(-0.08, 0, 0.03), Mat3::Identity())});
    scene.objects.push_back({"block", make_transform(Vec3(0.08, 0.02, 0.03), rot_z(0.4))});
    const auto L = render_labels(scene, library, cam, codes).labels;
    int maxima = 0;
    for (int v = 1; v + 1 < L.height; ++v) {
      for (int u = 1; u + 1 < L.width; ++u) {
        const float h = L.heatmap[L.pixel(u, v)];
        if (h <= 0.9f) continue;
        bool is_max = true;
        for (int dv = -1; dv <= 1; ++dv)
          for (int du = -1; du <= 1; ++du)
            if ((du || dv) && L.heatmap[L.pixel(u + du, v + dv)] >= h) is_max = false;
        maxima += is_max;
      }
    }
    CHECK(maxima == 2);
    CHECK(L.labelled_objects == std::vector<int>{0, 1});
  }

  SUBCASE("objects out of view are omitted") {
    SceneRecord scene;
    scene.objects.push_back({"ball", make_transform(Vec3(5, 5, 0.03), Mat3::Identity())});
    set_warnings_enabled(false);
    const auto L = render_labels(scene, library, cam, codes).labels;
    set_warnings_enabled(true);
    CHECK(L.labelled_objects.empty());
    CHECK(*std::max_element(L.heatmap.begin(), L.heatmap.end()) == 0.0f);
  }

  SUBCASE("missing code is an error") {
    SceneRecord scene;
    scene.objects.push_back({"ball", Pose::identity()});
    CHECK_THROWS_AS(render_labels(scene, library, cam, {}), Error);
  }
}

TEST_CASE("dataset files round trip") {
  const ObjectRecord obj = builtin_object("cylinder_thin");
  const IndexedMesh im(obj.mesh);
  const GraspSet set = labelled(obj, 50, 1);
  const auto samples = sample_sgdf(im, set, 200, 2);
  const std::string dir = temp_dir("dataset");
  save_grasp_set(dir + "/g.bin", set);
  save_samples(dir + "/s.bin", samples);
  const auto g = load_grasps(dir + "/g.bin");
  const auto s = load_samples(dir + "/s.bin");
  REQUIRE(g.size() == set.grasps.size());
  REQUIRE(s.size() == samples.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK((g[i].pose.matrix() - set.grasps[i].pose.matrix()).norm() < 1e-6);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].x.cast<float>() == samples[i].x.cast<float>());
    CHECK(static_cast<float>(s[i].s) == static_cast<float>(samples[i].s));
  }
  // Wrong artifact type and wrong version are distinct errors.
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code([&] { load_grasps(dir + "/s.bin"); }) == ErrorCode::kBadMagic);
  BinaryWriter w;
  w.magic("GRSP2");
  w.u64(0);
  w.save(dir + "/v2.bin");
  CHECK(code([&] { load_grasps(dir + "/v2.bin"); }) == ErrorCode::kVersionMismatch);

  DatasetManifest m;
  m.seed = 77;
  m.objects.push_back({"cylinder_thin", "cylinder_thin.obj", "g.bin", "s.bin", 1200, set.grasps.size(), 200,
                       set.provenance});
  save_manifest(dir, m);
  const DatasetManifest back = load_manifest(dir);
  CHECK(back.seed == 77);
  REQUIRE(back.objects.size() == 1);
  CHECK(back.objects[0].n_valid == set.grasps.size());
  CHECK(back.objects[0].provenance.mu == 0.5);
  std::filesystem::remove_all(dir);
}
