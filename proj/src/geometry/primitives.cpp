#include "shapegrasp/geometry/primitives.hpp"

#include <cmath>
#include <map>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

TriMesh orient_outward(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  TriMesh mesh = TriMesh::build(vertices, triangles);
  if (mesh.signed_volume() < 0.0) {
    for (auto& t : triangles) std::swap(t[1], t[2]);
    mesh = TriMesh::build(std::move(vertices), std::move(triangles));
  }
  return mesh;
}

}  // namespace

TriMesh make_box(const Vec3& size) {
  const Vec3 h = 0.5 * size;
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Triangle> t = {
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return orient_outward(std::move(v), std::move(t));
}

TriMesh make_icosphere(double radius, int subdivisions) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(t.size() * 4);
    for (const auto& f : t) {
      const auto a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    t = std::move(next);
  }
  for (auto& x : v) x *= radius;
  return orient_outward(std::move(v), std::move(t));
}

TriMesh make_revolved(const std::vector<std::pair<double, double>>& profile, int segments) {
  if (profile.size() < 3 || segments < 3)
    throw Error(ErrorCode::kInvalidArgument, "revolved profile needs >= 3 points and >= 3 segments");
  if (profile.front().first != 0.0 || profile.back().first != 0.0)
    throw Error(ErrorCode::kInvalidArgument, "revolved profile must start and end on the axis");

  std::vector<Vec3> v;
  std::vector<Triangle> t;
  v.emplace_back(0.0, 0.0, profile.front().second);
  const std::uint32_t bottom = 0;
  const auto rings = static_cast<std::uint32_t>(profile.size() - 2);
  const auto seg = static_cast<std::uint32_t>(segments);
  for (std::uint32_t r = 0; r < rings; ++r) {
    const auto [radius, z] = profile[r + 1];
    for (std::uint32_t j = 0; j < seg; ++j) {
      const double a = 2.0 * M_PI * j / seg;
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  v.emplace_back(0.0, 0.0, profile.back().second);
  const auto top = static_cast<std::uint32_t>(v.size() - 1);
  auto ring = [&](std::uint32_t r, std::uint32_t j) { return 1 + r * seg + (j % seg); };

  for (std::uint32_t j = 0; j < seg; ++j) t.push_back({bottom, ring(0, j + 1), ring(0, j)});
  for (std::uint32_t r = 0; r + 1 < rings; ++r) {
    for (std::uint32_t j = 0; j < seg; ++j) {
      t.push_back({ring(r, j), ring(r, j + 1), ring(r + 1, j + 1)});
      t.push_back({ring(r, j), ring(r + 1, j + 1), ring(r + 1, j)});
    }
  }
  for (std::uint32_t j = 0; j < seg; ++j) t.push_back({top, ring(rings - 1, j), ring(rings - 1, j + 1)});
  return orient_outward(std::move(v), std::move(t));
}

TriMesh make_cylinder(double radius, double height, int segments) {
  const double h = 0.5 * height;
  return make_revolved({{0.0, -h}, {radius, -h}, {radius, h}, {0.0, h}}, segments);
}

TriMesh make_capsule(double radius, double height, int segments, int cap_rings) {
  if (height < 2.0 * radius) throw Error(ErrorCode::kInvalidArgument, "capsule shorter than its diameter");
  const double h = 0.5 * height - radius;  // half length of the straight part
  std::vector<std::pair<double, double>> profile;
  profile.emplace_back(0.0, -h - radius);
  for (int i = 1; i <= cap_rings; ++i) {
    const double a = -M_PI / 2 + (M_PI / 2) * i / cap_rings;
    profile.emplace_back(radius * std::cos(a), -h + radius * std::sin(a));
  }
  for (int i = 0; i < cap_rings; ++i) {
    const double a = (M_PI / 2) * i / cap_rings;
    profile.emplace_back(radius * std::cos(a), h + radius * std::sin(a));
  }
  profile.emplace_back(0.0, h + radius);
  return make_revolved(profile, segments);
}

TriMesh make_cup(double radius, double height, double wall, double bottom, int segments) {
  if (wall <= 0.0 || wall >= radius || bottom <= 0.0 || bottom >= height)
    throw Error(ErrorCode::kInvalidArgument, "cup wall/bottom thickness out of range");
  const double h = 0.5 * height;
  return make_revolved({{0.0, -h},
                        {radius, -h},
                        {radius, h},
                        {radius - wall, h},
                        {radius - wall, -h + bottom},
                        {0.0, -h + bottom}},
                       segments);
}

TriMesh make_prism(int sides, double circumradius, double height) {
  return make_cylinder(circumradius, height, sides);
}

}  // namespace shapegrasp
