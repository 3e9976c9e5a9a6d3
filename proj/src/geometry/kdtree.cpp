#include "shapegrasp/geometry/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {
constexpr std::uint32_t kLeafSize = 8;

bool better(double d2, std::uint32_t i, double best_d2, std::uint32_t best_i) {
  return d2 < best_d2 || (d2 == best_d2 && i < best_i);
}
}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  nodes_[index].begin = begin;
  nodes_[index].end = end;
  if (end - begin <= kLeafSize) return index;

  Eigen::AlignedBox3d box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  int axis = 0;
  box.sizes().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
                     return a < b;
                   });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  nodes_[index].axis = axis;
  nodes_[index].split = split;
  return index;
}

Neighbor KdTree::nearest(const Vec3& q) const {
  if (points_.empty()) throw Error(ErrorCode::kEmptyCloud, "nearest-neighbour query on empty tree");
  Neighbor best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
  struct Item {
    std::int32_t node;
    double bound;
  };
  std::vector<Item> stack;
  stack.reserve(64);
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    // Equal bounds are still explored so equidistant lower indices are found.
    if (item.bound > best.distance2) continue;
    const Node& node = nodes_[item.node];
    if (node.left < 0) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const auto i = order_[k];
        const double d2 = (points_[i] - q).squaredNorm();
        if (better(d2, i, best.distance2, best.index)) best = {i, d2};
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const double plane2 = diff * diff;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    stack.push_back({far, std::max(item.bound, plane2)});
    stack.push_back({near, item.bound});
  }
  return best;
}

std::vector<Neighbor> KdTree::knn(const Vec3& q, std::size_t k) const {
  std::vector<Neighbor> out;
  if (points_.empty() || k == 0) return out;
  auto cmp = [](const Neighbor& a, const Neighbor& b) { return better(a.distance2, a.index, b.distance2, b.index); };
  // Max-heap on (distance, index): top is the current worst.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(cmp)> heap(cmp);
  struct Item {
    std::int32_t node;
    double bound;
  };
  std::vector<Item> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Item item = stack.back();
    stack.pop_back();
    if (heap.size() == k && item.bound > heap.top().distance2) continue;
    const Node& node = nodes_[item.node];
    if (node.left < 0) {
      for (std::uint32_t j = node.begin; j < node.end; ++j) {
        const auto i = order_[j];
        const double d2 = (points_[i] - q).squaredNorm();
        if (heap.size() < k) {
          heap.push({i, d2});
        } else if (better(d2, i, heap.top().distance2, heap.top().index)) {
          heap.pop();
          heap.push({i, d2});
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    stack.push_back({far, std::max(item.bound, diff * diff)});
    stack.push_back({near, item.bound});
  }
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> KdTree::radius(const Vec3& q, double r) const {
  std::vector<std::uint32_t> out;
  if (points_.empty()) return out;
  const double r2 = r * r;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.left < 0) {
      for (std::uint32_t j = node.begin; j < node.end; ++j) {
        if ((points_[order_[j]] - q).squaredNorm() <= r2) out.push_back(order_[j]);
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    if (diff - r <= 0.0) stack.push_back(node.left);
    if (diff + r >= 0.0) stack.push_back(node.right);
  }
  return out;
}

}  // namespace shapegrasp
