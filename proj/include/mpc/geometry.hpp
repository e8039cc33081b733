#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mpc::geometry {

using Vec3 = std::array<double, 3>;

inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Ordered set of 3D points with optional per-point features of uniform width.
// Coordinates are always finite; operations that need points reject empty
// clouds with SizeError.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points);
  PointCloud(std::vector<Vec3> points, std::vector<double> features, std::size_t feature_width);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Vec3>& points() const noexcept { return points_; }

  bool has_features() const noexcept { return feature_width_ > 0; }
  std::size_t feature_width() const noexcept { return feature_width_; }
  std::span<const double> feature(std::size_t i) const {
    return {features_.data() + i * feature_width_, feature_width_};
  }

  // Flat xyz array, row-major.
  std::vector<float> to_floats() const;
  static PointCloud from_floats(std::span<const float> xyz);

  PointCloud select(std::span<const std::size_t> indices) const;
  PointCloud translated(const Vec3& t) const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Vec3> points_;
  std::vector<double> features_;
  std::size_t feature_width_ = 0;
};

// k nearest reference points per query, row-major (query q owns entries
// [q*k, q*k+k)), ascending by distance, ties broken by lower index.
struct NeighborIndex {
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> squared_distances;

  std::size_t queries() const noexcept { return k == 0 ? 0 : indices.size() / k; }
  std::span<const std::uint32_t> row(std::size_t q) const { return {indices.data() + q * k, k}; }
};

// Static kd-tree for exact nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }
  // Nearest point: (index, squared distance); ties resolve to the lower index.
  std::pair<std::uint32_t, double> nearest(const Vec3& q) const;
  // k nearest, ascending by (distance, index); writes into the given spans.
  void knn(const Vec3& q, std::size_t k, std::span<std::uint32_t> out_idx, std::span<double> out_d2) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

NeighborIndex knn(const PointCloud& query, const PointCloud& reference, std::size_t k);

// Index of the nearest reference point for every query point.
std::vector<std::uint32_t> nearest_indices(const PointCloud& query, const PointCloud& reference);
// Squared distance from every query point to its nearest reference point.
std::vector<double> nearest_squared_distances(const PointCloud& query, const PointCloud& reference);

// Halves the point count: voxel-grid occupancy (one representative per cell,
// the member closest to the cell's mean) followed by farthest-point
// adjustment to exactly floor(N/2) points. Returned indices are ascending.
// The selected coordinate set does not depend on input order; `seed` only
// picks the farthest-point start among the representatives.
std::vector<std::size_t> downsample_half_indices(const PointCloud& cloud, std::uint64_t seed = 0);
PointCloud downsample_half(const PointCloud& cloud, std::uint64_t seed = 0);

// Farthest point sampling of `count` points starting at `start`; returns the
// chosen indices in selection order.
std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t count,
                                               std::size_t start);

// Mean squared nearest-neighbour distance, summed over both directions.
double chamfer(const PointCloud& p, const PointCloud& q);

// Unidirectional Hausdorff distance from p to q (not squared, not symmetric).
double uhd(const PointCloud& p, const PointCloud& q);

// Optimal bijection between equally sized clouds under Euclidean cost.
struct EmdResult {
  double value = 0.0;                // mean matched distance
  bool exact = true;                 // false when the auction approximation ran
  double epsilon = 0.0;              // final auction epsilon (0 when exact)
  std::vector<std::uint32_t> match;  // p[i] is matched to q[match[i]]
};

inline constexpr std::size_t kEmdExactLimit = 512;

EmdResult emd_match(const PointCloud& p, const PointCloud& q);
double emd(const PointCloud& p, const PointCloud& q);

// Solves the square assignment problem min sum cost[i][assign[i]] exactly
// (shortest augmenting paths with potentials). cost is row-major n x n.
std::vector<std::uint32_t> hungarian(std::span<const double> cost, std::size_t n);

// Auction algorithm with epsilon scaling for maximisation-free min-cost
// assignment. The result is within n * final_epsilon of optimal.
std::vector<std::uint32_t> auction(std::span<const double> cost, std::size_t n, double final_epsilon);

// Vertices of the convex hull of `points` (flags, same order as input).
std::vector<bool> convex_hull_vertices(std::span<const Vec3> points);

}  // namespace mpc::geometry
