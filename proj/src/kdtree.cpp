#include <algorithm>
#include <limits>
#include <numeric>

#include "mpc/error.hpp"
#include "mpc/geometry.hpp"

namespace mpc::geometry {

namespace {

constexpr std::uint32_t kLeafSize = 8;

// Sorted candidate list of fixed capacity, ordered by (distance, index).
struct Candidates {
  std::span<std::uint32_t> idx;
  std::span<double> d2;
  std::size_t count = 0;

  double bound() const {
    return count < idx.size() ? std::numeric_limits<double>::infinity() : d2[count - 1];
  }

  void offer(double d, std::uint32_t i) {
    const std::size_t cap = idx.size();
    if (count == cap && (d > d2[cap - 1] || (d == d2[cap - 1] && i > idx[cap - 1]))) return;
    std::size_t pos = count < cap ? count++ : cap - 1;
    while (pos > 0 && (d < d2[pos - 1] || (d == d2[pos - 1] && i < idx[pos - 1]))) {
      d2[pos] = d2[pos - 1];
      idx[pos] = idx[pos - 1];
      --pos;
    }
    d2[pos] = d;
    idx[pos] = i;
  }
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  std::uint8_t axis = 0;
  for (std::uint8_t a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::pair<std::uint32_t, double> KdTree::nearest(const Vec3& q) const {
  std::uint32_t idx = 0;
  double d2 = 0.0;
  knn(q, 1, {&idx, 1}, {&d2, 1});
  return {idx, d2};
}

void KdTree::knn(const Vec3& q, std::size_t k, std::span<std::uint32_t> out_idx, std::span<double> out_d2) const {
  if (k == 0 || k > points_.size()) throw SizeError("KdTree::knn: invalid k");
  Candidates best{out_idx.first(k), out_d2.first(k)};

  // Explicit stack; far children are revisited only if the splitting plane is
  // within the current bound (<= so equal-distance lower indices are found).
  struct Pending {
    std::int32_t node;
    double plane_d2;
  };
  Pending stack[128];
  int top = 0;
  stack[top++] = {0, 0.0};
  while (top > 0) {
    const Pending cur = stack[--top];
    if (cur.plane_d2 > best.bound()) continue;
    const Node& node = nodes_[cur.node];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t p = order_[i];
        best.offer(squared_distance(q, points_[p]), p);
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    stack[top++] = {far, diff * diff};
    stack[top++] = {near, 0.0};
  }
}

}  // namespace mpc::geometry
