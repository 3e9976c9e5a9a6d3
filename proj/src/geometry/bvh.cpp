#include "shapegrasp/geometry/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

constexpr std::uint32_t kLeafSize = 4;

double box_distance2(const Box3& box, const Vec3& p) {
  const Vec3 d = (box.min() - p).cwiseMax(p - box.max()).cwiseMax(0.0);
  return d.squaredNorm();
}

// Slab test; returns the entry parameter or nullopt when the ray misses the
// box within [t_min, t_max].
std::optional<double> ray_box(const Box3& box, const Vec3& origin, const Vec3& inv_dir, double t_min,
                              double t_max) {
  for (int a = 0; a < 3; ++a) {
    double t0 = (box.min()[a] - origin[a]) * inv_dir[a];
    double t1 = (box.max()[a] - origin[a]) * inv_dir[a];
    if (std::isnan(t0) || std::isnan(t1)) {
      // Ray parallel to the slab and lying on its boundary plane.
      if (origin[a] < box.min()[a] || origin[a] > box.max()[a]) return std::nullopt;
      continue;
    }
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) return std::nullopt;
  }
  return t_min;
}

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                             const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(qvec) * inv_det;
}

bool triangle_overlaps_box(const std::array<Vec3, 3>& tri, const OrientedBox& box) {
  const Mat3 rt = box.pose.rotation.transpose();
  const Vec3 v0 = rt * (tri[0] - box.pose.translation);
  const Vec3 v1 = rt * (tri[1] - box.pose.translation);
  const Vec3 v2 = rt * (tri[2] - box.pose.translation);
  const Vec3& h = box.half_extents;

  // Box face normals.
  for (int a = 0; a < 3; ++a) {
    const double lo = std::min({v0[a], v1[a], v2[a]});
    const double hi = std::max({v0[a], v1[a], v2[a]});
    if (lo > h[a] || hi < -h[a]) return false;
  }
  const std::array<Vec3, 3> edges = {v1 - v0, v2 - v1, v0 - v2};
  // Triangle normal.
  const Vec3 n = edges[0].cross(edges[1]);
  {
    const double d = n.dot(v0);
    const double r = h.x() * std::abs(n.x()) + h.y() * std::abs(n.y()) + h.z() * std::abs(n.z());
    if (d > r || d < -r) return false;
  }
  // Edge cross box-axis products.
  for (const auto& e : edges) {
    for (int a = 0; a < 3; ++a) {
      const Vec3 axis = Vec3::Unit(a).cross(e);
      if (axis.squaredNorm() < 1e-30) continue;
      const double p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
      const double r = h.x() * std::abs(axis.x()) + h.y() * std::abs(axis.y()) + h.z() * std::abs(axis.z());
      if (std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r) return false;
    }
  }
  return true;
}

IndexedMesh::IndexedMesh(TriMesh mesh) : mesh_(std::move(mesh)) {
  const auto n = static_cast<std::uint32_t>(mesh_.triangles.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  if (n == 0) return;
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto c = mesh_.corners(i);
    centroids[i] = (c[0] + c[1] + c[2]) / 3.0;
  }
  nodes_.reserve(2 * n / kLeafSize + 2);
  build(0, n, centroids);
}

std::uint32_t IndexedMesh::build(std::uint32_t begin, std::uint32_t end,
                                 const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Box3 box, cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto c = mesh_.corners(order_[i]);
    for (const auto& v : c) box.extend(v);
    cbox.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }
  int axis = 0;
  cbox.sizes().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
                     return a < b;
                   });
  const auto left = build(begin, mid, centroids);
  const auto right = build(mid, end, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

ClosestPoint IndexedMesh::closest(const Vec3& q) const {
  if (nodes_.empty()) throw Error(ErrorCode::kEmptyMesh, "closest-point query on empty mesh");
  ClosestPoint best;
  best.distance2 = std::numeric_limits<double>::infinity();
  struct Item {
    std::uint32_t node;
    double d2;
  };
  std::vector<Item> stack;
  stack.reserve(64);
  stack.push_back({0, box_distance2(nodes_[0].box, q)});
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    if (item.d2 > best.distance2) continue;
    const Node& node = nodes_[item.node];
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto tri = order_[i];
        const auto c = mesh_.corners(tri);
        const Vec3 p = closest_point_on_triangle(q, c[0], c[1], c[2]);
        const double d2 = (p - q).squaredNorm();
        if (d2 < best.distance2 || (d2 == best.distance2 && tri < best.triangle)) best = {d2, p, tri};
      }
      continue;
    }
    const double dl = box_distance2(nodes_[node.left].box, q);
    const double dr = box_distance2(nodes_[node.right].box, q);
    // Push the farther child first so the nearer one is visited next.
    if (dl < dr) {
      stack.push_back({node.right, dr});
      stack.push_back({node.left, dl});
    } else {
      stack.push_back({node.left, dl});
      stack.push_back({node.right, dr});
    }
  }
  return best;
}

std::optional<RayHit> IndexedMesh::first_hit(const Vec3& origin, const Vec3& dir, double t_min,
                                             double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_dir = dir.cwiseInverse();
  std::optional<RayHit> best;
  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    const double limit = best ? best->t : t_max;
    if (!ray_box(node.box, origin, inv_dir, t_min, limit)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto tri = order_[i];
        const auto c = mesh_.corners(tri);
        const auto t = intersect_ray_triangle(origin, dir, c[0], c[1], c[2]);
        if (!t || *t < t_min || *t > t_max) continue;
        if (!best || *t < best->t || (*t == best->t && tri < best->triangle)) best = RayHit{*t, tri};
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  return best;
}

int IndexedMesh::count_crossings(const Vec3& origin, const Vec3& dir) const {
  if (nodes_.empty()) return 0;
  const Vec3 inv_dir = dir.cwiseInverse();
  int count = 0;
  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!ray_box(node.box, origin, inv_dir, 0.0, std::numeric_limits<double>::infinity())) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto c = mesh_.corners(order_[i]);
        const auto t = intersect_ray_triangle(origin, dir, c[0], c[1], c[2]);
        if (t && *t > 0.0) ++count;
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  return count;
}

bool IndexedMesh::overlaps_box(const OrientedBox& box) const {
  if (nodes_.empty()) return false;
  // World-space AABB of the oriented box for culling.
  const Vec3 extent = box.pose.rotation.cwiseAbs() * box.half_extents;
  const Box3 query(box.pose.translation - extent, box.pose.translation + extent);
  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.intersects(query)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (triangle_overlaps_box(mesh_.corners(order_[i]), box)) return true;
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  return false;
}

}  // namespace shapegrasp
