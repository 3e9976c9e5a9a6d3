#include <cmath>
#include <random>

#include "doctest.h"
#include "shapegrasp/error.hpp"
#include "shapegrasp/geometry/primitives.hpp"
#include "shapegrasp/gripper/gripper.hpp"

using namespace shapegrasp;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

// Grasp whose contact-window centre lands on `center`.
Grasp centered_grasp(const Vec3& center, const Mat3& r, const GripperModel& m) {
  Grasp g;
  g.pose = make_transform(center - r * m.grasp_center(), r);
  return g;
}

bool columns_are_permutation(const ControlPoints& a, const ControlPoints& b) {
  std::vector<bool> used(5, false);
  for (int i = 0; i < 5; ++i) {
    bool found = false;
    for (int j = 0; j < 5 && !found; ++j) {
      if (!used[j] && (a.col(i) - b.col(j)).norm() < 1e-15) used[j] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("control point sets") {
  const GripperModel m = GripperModel::default_model();
  const auto [v, vf] = control_point_sets(m);
  CHECK(columns_are_permutation(v, vf));
  CHECK(v.col(0) == vf.col(0));
  CHECK(v.col(0) == Vec4(0, 0, 0, 1));
  const ControlPoints twice = Eigen::Vector4d(-1, -1, 1, 1).asDiagonal() * vf;
  CHECK(twice == v);
  // The flipped grasp moves the control points onto the flipped set.
  std::mt19937_64 rng(1);
  Grasp g;
  g.pose = make_transform(Vec3(0.1, -0.2, 0.3), random_rotation(rng));
  const ControlPoints moved = flip(g).pose.matrix() * v;
  CHECK((moved - g.pose.matrix() * vf).norm() < 1e-12);
}

TEST_CASE("default model is valid and config parsing") {
  const GripperModel m = GripperModel::default_model();
  CHECK_NOTHROW(m.validate());
  CHECK(m.tip_z() == doctest::Approx(0.112));
  CHECK(m.grasp_center().z() == doctest::Approx(0.089));

  const GripperModel p = parse_gripper_config(
      "# wide gripper\nmax_opening = 0.1\nfinger_depth = 0.05\nrays_per_finger = 5\n"
      "control_point = 0 0 0\ncontrol_point = 0.05 0 0.06\ncontrol_point = -0.05 0 0.06\n"
      "control_point = 0.05 0 0.11\ncontrol_point = -0.05 0 0.11\n"
      "box = 0 0 0.01 0.06 0.01 0.01\n");
  CHECK(p.max_opening == 0.1);
  CHECK(p.finger_depth == 0.05);
  CHECK(p.rays_per_finger == 5);
  CHECK(p.collision_boxes.size() == 1);
  CHECK(p.control_points[3] == Vec3(0.05, 0, 0.11));

  auto code = [](const std::string& text) {
    try {
      parse_gripper_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code("max_opening = -1\n") == ErrorCode::kConfig);
  CHECK(code("color = red\n") == ErrorCode::kConfig);
  CHECK(code("control_point = 0 0 0\ncontrol_point = 0.05 0 0.06\ncontrol_point = -0.05 0 0.06\n"
             "control_point = 0.05 0 0.11\ncontrol_point = -0.04 0 0.11\n") == ErrorCode::kConfig);
  CHECK_THROWS_AS(load_gripper_config("/nonexistent/gripper.cfg"), Error);
}

TEST_CASE("antipodal on a 4 cm box") {
  const GripperModel m = GripperModel::default_model();
  const IndexedMesh box(make_box(Vec3(0.04, 0.04, 0.06)));
  const Grasp g = centered_grasp(Vec3::Zero(), Mat3::Identity(), m);
  const auto r = check_antipodal(box, g, m, 0.5);
  REQUIRE(r.contacts);
  CHECK(r.valid);
  CHECK(r.contacts->c1.x() == doctest::Approx(-0.02));
  CHECK(r.contacts->c2.x() == doctest::Approx(0.02));
  CHECK(r.contacts->n1.dot(r.contacts->n2) == doctest::Approx(-1.0));

  const Grasp turned = centered_grasp(Vec3::Zero(), rot_z(M_PI / 4), m);
  CHECK_FALSE(check_antipodal(box, turned, m, 0.5).valid);
  // tan(45 deg) = 1, so the cone admits the diagonal only above mu = 1.
  CHECK(check_antipodal(box, turned, m, 1.01).valid);
}

TEST_CASE("antipodal on a sphere through the centre") {
  const GripperModel m = GripperModel::default_model();
  const IndexedMesh sphere(make_icosphere(0.03, 4));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Grasp g = centered_grasp(Vec3::Zero(), random_rotation(rng), m);
    // Facets of subdivision 4 tilt normals by about 1.5 degrees, below
    // atan(0.1).
    for (double mu : {0.1, 0.5, 1.0, 4.0}) CHECK(check_antipodal(sphere, g, m, mu).valid);
  }
}

TEST_CASE("antipodal rejects objects wider than the opening and empty space") {
  const GripperModel m = GripperModel::default_model();
  const IndexedMesh cube(make_box(Vec3(0.2, 0.2, 0.2)));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    CHECK_FALSE(check_antipodal(cube, centered_grasp(Vec3::Zero(), random_rotation(rng), m), m, 5.0).valid);
  }
  const Grasp far = centered_grasp(Vec3(1, 1, 1), Mat3::Identity(), m);
  const auto r = check_antipodal(cube, far, m, 0.5);
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.contacts.has_value());
}

TEST_CASE("antipodality is monotone in mu and flip symmetric") {
  const GripperModel m = GripperModel::default_model();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  const std::vector<double> mus = {0.1, 0.2, 0.4, 0.8, 1.6};
  int valid_any = 0;
  for (const TriMesh& mesh : {make_box(Vec3(0.05, 0.03, 0.08)), make_cylinder(0.025, 0.08), make_capsule(0.02, 0.09)}) {
    const IndexedMesh im(mesh);
    for (int i = 0; i < 300; ++i) {
      const Grasp g = centered_grasp(Vec3(u(rng), u(rng), u(rng)), random_rotation(rng), m);
      bool prev = false;
      for (double mu : mus) {
        const bool v = check_antipodal(im, g, m, mu).valid;
        CHECK((!prev || v));
        prev = v;
        CHECK(check_antipodal(im, flip(g), m, mu).valid == v);
      }
      valid_any += prev;
    }
  }
  CHECK(valid_any > 50);
}

TEST_CASE("mesh collision") {
  const GripperModel m = GripperModel::default_model();
  const IndexedMesh box(make_box(Vec3(0.3, 0.3, 0.1)));
  Grasp far;
  far.pose = make_transform(Vec3(0, 0, 2), Mat3::Identity());
  CHECK_FALSE(check_collision_mesh(box, far, m, 0.005));

  Grasp inside;
  inside.pose = make_transform(Vec3(0, 0, -0.015), Mat3::Identity());
  CHECK(check_collision_mesh(box, inside, m, 0.0));

  // Top-down approach onto the top face z = 0.05: the fingertips are the
  // lowest part of the gripper and touch when the origin is tip_z above it.
  const Mat3 down = axis_angle(Vec3::UnitX(), M_PI);
  Grasp hover;
  hover.pose = make_transform(Vec3(0, 0, 0.05 + m.tip_z() + 1e-6), down);
  CHECK_FALSE(check_collision_mesh(box, hover, m, 0.0));
  CHECK(check_collision_mesh(box, hover, m, 0.005));
  hover.pose.translation.z() -= 2e-6;
  CHECK(check_collision_mesh(box, hover, m, 0.0));

  // Symmetric boxes give the same verdict for the flipped grasp.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    Grasp g;
    g.pose = make_transform(Vec3(u(rng), u(rng), u(rng)), random_rotation(rng));
    CHECK(check_collision_mesh(box, g, m, 0.003) == check_collision_mesh(box, flip(g), m, 0.003));
  }
}

TEST_CASE("point collision") {
  const GripperModel m = GripperModel::default_model();
  std::mt19937_64 rng(6);
  Grasp g;
  g.pose = make_transform(Vec3(0.1, 0.2, 0.3), random_rotation(rng));
  CHECK_FALSE(check_collision_points(PointCloud{}, g, m, 0.005));
  CHECK_FALSE(check_collision_points(KdTree{}, g, m, 0.005));

  PointCloud palm;
  palm.points = {g.pose.apply(m.collision_boxes[0].pose.translation)};
  CHECK(check_collision_points(palm, g, m, 0.0));

  // Palm bottom face is z = 0 in the gripper frame.
  const double c = 0.005, eps = 1e-9;
  PointCloud out, in;
  out.points = {g.pose.apply(Vec3(0, 0, -(c + eps)))};
  in.points = {g.pose.apply(Vec3(0, 0, -(c - eps)))};
  CHECK_FALSE(check_collision_points(out, g, m, c));
  CHECK(check_collision_points(in, g, m, c));

  std::uniform_real_distribution<double> u(-0.08, 0.2);
  PointCloud cloud;
  for (int i = 0; i < 3000; ++i) cloud.points.push_back(g.pose.apply(Vec3(u(rng), u(rng), u(rng))));
  const KdTree tree(cloud.points);
  for (int i = 0; i < 100; ++i) {
    Grasp h;
    h.pose = make_transform(g.pose.translation + Vec3(u(rng), u(rng), u(rng)), random_rotation(rng));
    bool prev = false;
    for (double clearance : {0.0, 0.002, 0.005, 0.01}) {
      const bool hit = check_collision_points(cloud, h, m, clearance);
      CHECK(hit == check_collision_points(tree, h, m, clearance));
      CHECK((!prev || hit));
      prev = hit;
    }
  }
}
