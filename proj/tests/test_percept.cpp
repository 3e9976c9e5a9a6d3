#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "shapegrasp/datagen/scene.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/primitives.hpp"
#include "shapegrasp/percept/percept.hpp"

using namespace shapegrasp;

namespace {

MapTensor blank(int w, int h, int c = 1) {
  MapTensor m;
  m.width = w;
  m.height = h;
  m.channels = c;
  m.data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
  return m;
}

void add_gaussian(MapTensor& m, double cu, double cv, double sigma, double peak) {
  for (int v = 0; v < m.height; ++v)
    for (int u = 0; u < m.width; ++u) {
      const double d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
      float& x = m.data[m.index(u, v)];
      x = std::max(x, static_cast<float>(peak * std::exp(-0.5 * d2 / (sigma * sigma))));
    }
}

struct Fixture {
  std::vector<ObjectRecord> library = {make_object_record("ball", make_icosphere(0.03, 3)),
                                       make_object_record("block", make_box(Vec3(0.04, 0.05, 0.06)))};
  std::map<std::string, LatentCode> codes;
  SceneCamera cam;
  SceneRecord scene;

  Fixture() {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> g;
    for (const auto& o : library) {
      LatentCode c(kLatentDim);
      for (int i = 0; i < kLatentDim; ++i) c[i] = g(rng);
      codes[o.id] = c;
    }
    scene.objects.push_back({"ball", make_transform(Vec3(-0.07, 0.0, 0.03), Mat3::Identity())});
    scene.objects.push_back({"block", make_transform(Vec3(0.07, 0.02, 0.03), rot_z(0.7))});
  }
};

}  // namespace

TEST_CASE("extract_peaks") {
  SUBCASE("single gaussian") {
    MapTensor m = blank(120, 100);
    add_gaussian(m, 40, 60, 4.0, 1.0);
    const auto peaks = extract_peaks(m);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].u == 40);
    CHECK(peaks[0].v == 60);
    CHECK(peaks[0].value == doctest::Approx(1.0));
  }
  SUBCASE("all zero") { CHECK(extract_peaks(blank(64, 48)).empty()); }
  SUBCASE("two gaussians three pixels apart keep the stronger") {
    MapTensor m = blank(80, 80);
    add_gaussian(m, 30, 40, 1.0, 0.9);
    add_gaussian(m, 33, 40, 1.0, 1.0);
    const auto peaks = extract_peaks(m, 0.4, 5);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].u == 33);
  }
  SUBCASE("plateau is not a strict maximum") {
    MapTensor m = blank(20, 20);
    m.data[m.index(5, 5)] = 0.8f;
    m.data[m.index(6, 5)] = 0.8f;
    CHECK(extract_peaks(m).empty());
  }
  SUBCASE("sorted by value, below threshold dropped") {
    MapTensor m = blank(100, 40);
    add_gaussian(m, 15, 20, 2.0, 0.6);
    add_gaussian(m, 50, 20, 2.0, 0.95);
    add_gaussian(m, 85, 20, 2.0, 0.3);
    const auto peaks = extract_peaks(m);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].u == 50);
    CHECK(peaks[1].u == 15);
  }
}

TEST_CASE("decode_detections") {
  Fixture f;
  const auto labelled = render_labels(f.scene, f.library, f.cam, f.codes);
  const EncoderMaps maps = maps_from_labels(labelled.labels);

  SUBCASE("label round trip") {
    const auto dets = decode_detections(maps);
    REQUIRE(dets.size() == 2);
    for (std::size_t i = 0; i < f.scene.objects.size(); ++i) {
      const Pose gt = camera_frame_pose(f.cam, f.scene.objects[i].pose);
      const LatentCode& code = f.codes.at(f.scene.objects[i].object_id);
      int matched = 0;
      for (const auto& d : dets) {
        if (d.code.size() != code.size() || d.code != code) continue;
        ++matched;
        CHECK((d.pose.rotation - gt.rotation).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((d.pose.translation - gt.translation).norm() < 1e-6);
        CHECK(d.objectness >= 0.4);
      }
      CHECK(matched == 1);
    }
  }
  SUBCASE("rotation block scaled by two decodes identically") {
    EncoderMaps scaled = maps;
    for (std::size_t p = 0; p * 12 < scaled.pose.data.size(); ++p)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) scaled.pose.data[p * 12 + r * 4 + c] *= 2.0f;
    const auto a = decode_detections(maps), b = decode_detections(scaled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK((a[i].pose.rotation - b[i].pose.rotation).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("empty heatmap") {
    EncoderMaps empty = maps;
    std::fill(empty.heatmap.data.begin(), empty.heatmap.data.end(), 0.0f);
    CHECK(decode_detections(empty).empty());
  }
  SUBCASE("degenerate block dropped") {
    EncoderMaps bad = maps;
    const auto peaks = extract_peaks(bad.heatmap);
    REQUIRE(peaks.size() == 2);
    const std::size_t pixel = static_cast<std::size_t>(peaks[0].v) * bad.heatmap.width + peaks[0].u;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) bad.pose.data[pixel * 12 + r * 4 + c] = r == 0 ? 1.0f : 0.0f;
    set_warnings_enabled(false);
    CHECK(decode_detections(bad).size() == 1);
    set_warnings_enabled(true);
  }
  SUBCASE("mismatched maps") {
    EncoderMaps bad = maps;
    bad.pose.data.pop_back();
    CHECK_THROWS_AS(decode_detections(bad), Error);
  }
}

TEST_CASE("map io round trip") {
  MapTensor m = blank(7, 5, 3);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = 0.25f * static_cast<float>(i) - 3.0f;
  const auto path = std::filesystem::temp_directory_path() / "shapegrasp_test_map.bin";
  save_map(path.string(), m);
  const MapTensor r = load_map(path.string());
  CHECK(r.width == 7);
  CHECK(r.height == 5);
  CHECK(r.channels == 3);
  CHECK(r.data == m.data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_map(path.string()), Error);
}

TEST_CASE("pose_points") {
  const auto id = pose_points(Pose{});
  CHECK(id[0].norm() == 0.0);
  CHECK((id[1] - Vec3(0.1, 0, 0)).norm() == 0.0);
  CHECK((id[3] - Vec3(0, 0, 0.1)).norm() == 0.0);

  const Vec3 t(0.3, -0.2, 0.5);
  const auto tr = pose_points(make_transform(t, Mat3::Identity()));
  for (int k = 0; k < 4; ++k) CHECK((tr[k] - id[k] - t).norm() < 1e-15);

  // Rotation by theta about an axis: the displacement of a point at distance
  // d perpendicular to the axis is the chord 2 d sin(theta / 2).
  const double theta = 0.73;
  const auto a = pose_points(Pose{}), b = pose_points(make_transform(Vec3::Zero(), rot_z(theta)));
  double max_disp = 0.0;
  for (int k = 0; k < 4; ++k) max_disp = std::max(max_disp, (a[k] - b[k]).norm());
  CHECK(max_disp == doctest::Approx(2.0 * 0.1 * std::sin(theta / 2.0)).epsilon(1e-12));
}

TEST_CASE("encoder_loss") {
  Fixture f;
  const auto gt = render_labels(f.scene, f.library, f.cam, f.codes).labels;
  const EncoderMaps exact = maps_from_labels(gt);

  SUBCASE("exact prediction is zero") {
    const auto l = encoder_loss(exact, gt);
    CHECK(l.total == 0.0);
  }
  SUBCASE("heatmap offset by 0.1 everywhere") {
    EncoderMaps pred = exact;
    for (std::size_t i = 0; i < pred.heatmap.data.size(); ++i)
      pred.heatmap.data[i] = static_cast<float>(static_cast<double>(gt.heatmap[i]) + 0.1);
    const auto l = encoder_loss(pred, gt);
    CHECK(l.heat == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(l.total == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("pose translated by 1 cm on mask pixels") {
    EncoderMaps pred = exact;
    for (std::size_t i = 0; i < gt.instance_masks.size(); ++i)
      if (gt.instance_masks[i] >= 0) pred.pose.data[i * 12 + 3] += 0.01f;
    const auto l = encoder_loss(pred, gt);
    CHECK(l.pose == doctest::Approx(0.01).epsilon(1e-4));
    CHECK(l.total == doctest::Approx(0.05).epsilon(1e-4));
  }
  SUBCASE("code offset is a heatmap-weighted per-channel mean") {
    EncoderMaps pred = exact;
    for (std::size_t i = 0; i < gt.instance_masks.size(); ++i)
      if (gt.instance_masks[i] >= 0) pred.code.data[i * kLatentDim + 2] += 0.64f;
    const auto l = encoder_loss(pred, gt);
    CHECK(l.shape == doctest::Approx(0.64 / kLatentDim).epsilon(1e-5));
    CHECK(l.heat == 0.0);
    CHECK(l.pose == 0.0);
  }
  SUBCASE("no mask pixels gives zero pose and shape") {
    ImageLabels empty = gt;
    std::fill(empty.instance_masks.begin(), empty.instance_masks.end(), -1);
    EncoderMaps pred = exact;
    pred.pose.data[3] += 1.0f;
    const auto l = encoder_loss(pred, empty);
    CHECK(l.pose == 0.0);
    CHECK(l.shape == 0.0);
  }
}

TEST_CASE("oracle_encoder") {
  Fixture f;
  const auto labelled = render_labels(f.scene, f.library, f.cam, f.codes);

  SUBCASE("zero noise reproduces the labels") {
    const EncoderMaps m = oracle_encoder(f.scene, f.library, f.cam, f.codes, {});
    CHECK(m.heatmap.data == labelled.labels.heatmap);
    CHECK(m.pose.data == labelled.labels.pose_map);
    CHECK(m.code.data == labelled.labels.code_map);
  }
  SUBCASE("deterministic per seed") {
    const OracleNoise n{0.005, 0.05, 0.1, 11};
    const EncoderMaps a = oracle_encoder(f.scene, f.library, f.cam, f.codes, n);
    const EncoderMaps b = oracle_encoder(f.scene, f.library, f.cam, f.codes, n);
    CHECK(a.pose.data == b.pose.data);
    CHECK(a.code.data == b.code.data);
  }
  SUBCASE("translation noise statistics and exact rotations") {
    const RenderResult r = render_scene(f.scene, f.library, f.cam);
    const Pose gt = camera_frame_pose(f.cam, f.scene.objects[0].pose);
    const LatentCode& code = f.codes.at("ball");
    const double sigma = 0.005;
    const int trials = 500;
    Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
    double max_rot_err = 0.0;
    for (int k = 0; k < trials; ++k) {
      const OracleNoise n{sigma, 0.0, 0.0, static_cast<std::uint64_t>(1000 + k)};
      const auto dets =
          decode_detections(oracle_encoder(f.scene, f.cam, r.instance, r.depth.width, r.depth.height, f.codes, n));
      const Detection* ball = nullptr;
      for (const auto& d : dets)
        if (d.code == code) ball = &d;
      REQUIRE(ball != nullptr);
      const Vec3 e = ball->pose.translation - gt.translation;
      sum += e;
      sq += e.cwiseProduct(e);
      max_rot_err = std::max(max_rot_err, (ball->pose.rotation - gt.rotation).cwiseAbs().maxCoeff());
    }
    for (int a = 0; a < 3; ++a) {
      const double mean = sum[a] / trials;
      const double std = std::sqrt(sq[a] / trials - mean * mean);
      CHECK(std::abs(std - sigma) < 0.2 * sigma);
    }
    CHECK(max_rot_err < 1e-6);
  }
  SUBCASE("missing code throws") {
    std::map<std::string, LatentCode> partial = {{"ball", f.codes.at("ball")}};
    CHECK_THROWS_AS(oracle_encoder(f.scene, f.library, f.cam, partial, {}), Error);
  }
}
