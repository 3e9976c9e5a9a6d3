#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapegrasp/geometry/pose.hpp"

namespace shapegrasp {

struct Neighbor {
  std::uint32_t index = 0;
  double distance2 = 0.0;
};

// Static 3-d tree over a point set. Ties in distance resolve to the lowest
// point index, so results match an exhaustive scan exactly.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::uint32_t i) const { return points_[i]; }

  Neighbor nearest(const Vec3& q) const;
  // k nearest, sorted by (distance, index).
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const;
  // All points with distance2 <= radius^2, unordered.
  std::vector<std::uint32_t> radius(const Vec3& q, double r) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_ for leaves
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace shapegrasp
