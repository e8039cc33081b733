#include "mpc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "mpc/error.hpp"
#include "mpc/rng.hpp"

namespace mpc::geometry {

namespace {

// Below this reference size a linear scan beats building a tree.
constexpr std::size_t kBruteForceLimit = 48;

void require_non_empty(const PointCloud& c, const char* what) {
  if (c.empty()) throw SizeError(std::string(what) + ": empty point cloud");
}

bool lex_less(const Vec3& a, const Vec3& b) { return a < b; }

}  // namespace

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (const Vec3& p : points_) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      throw NumericError("point cloud contains a non-finite coordinate");
    }
  }
}

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<double> features, std::size_t feature_width)
    : PointCloud(std::move(points)) {
  if (feature_width == 0 || features.size() != points_.size() * feature_width) {
    throw SizeError("feature count does not match point count");
  }
  features_ = std::move(features);
  feature_width_ = feature_width;
}

std::vector<float> PointCloud::to_floats() const {
  std::vector<float> out;
  out.reserve(points_.size() * 3);
  for (const Vec3& p : points_) {
    out.push_back(static_cast<float>(p[0]));
    out.push_back(static_cast<float>(p[1]));
    out.push_back(static_cast<float>(p[2]));
  }
  return out;
}

PointCloud PointCloud::from_floats(std::span<const float> xyz) {
  if (xyz.size() % 3 != 0) throw SizeError("coordinate array length is not a multiple of 3");
  std::vector<Vec3> pts(xyz.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
  }
  return PointCloud(std::move(pts));
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Vec3> pts;
  pts.reserve(indices.size());
  std::vector<double> feats;
  for (std::size_t i : indices) {
    if (i >= points_.size()) throw SizeError("select: index out of range");
    pts.push_back(points_[i]);
    if (feature_width_ > 0) {
      auto f = feature(i);
      feats.insert(feats.end(), f.begin(), f.end());
    }
  }
  if (feature_width_ > 0 && !pts.empty()) return PointCloud(std::move(pts), std::move(feats), feature_width_);
  return PointCloud(std::move(pts));
}

PointCloud PointCloud::translated(const Vec3& t) const {
  PointCloud out = *this;
  for (Vec3& p : out.points_) {
    p[0] += t[0];
    p[1] += t[1];
    p[2] += t[2];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Neighbour queries
// ---------------------------------------------------------------------------

namespace {

void brute_knn_row(const Vec3& q, std::span<const Vec3> ref, std::size_t k, std::span<std::uint32_t> out_idx,
                   std::span<double> out_d2) {
  std::vector<std::pair<double, std::uint32_t>> all(ref.size());
  for (std::size_t j = 0; j < ref.size(); ++j) all[j] = {squared_distance(q, ref[j]), static_cast<std::uint32_t>(j)};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  for (std::size_t j = 0; j < k; ++j) {
    out_d2[j] = all[j].first;
    out_idx[j] = all[j].second;
  }
}

}  // namespace

NeighborIndex knn(const PointCloud& query, const PointCloud& reference, std::size_t k) {
  if (k == 0) throw SizeError("knn: k must be positive");
  if (k > reference.size()) {
    throw SizeError("knn: k=" + std::to_string(k) + " exceeds reference size " + std::to_string(reference.size()));
  }
  NeighborIndex out;
  out.k = k;
  out.indices.resize(query.size() * k);
  out.squared_distances.resize(query.size() * k);
  const auto& ref = reference.points();
  if (reference.size() <= kBruteForceLimit || 4 * k > reference.size()) {
    for (std::size_t q = 0; q < query.size(); ++q) {
      brute_knn_row(query[q], ref, k, {out.indices.data() + q * k, k}, {out.squared_distances.data() + q * k, k});
    }
    return out;
  }
  KdTree tree(ref);
  for (std::size_t q = 0; q < query.size(); ++q) {
    tree.knn(query[q], k, {out.indices.data() + q * k, k}, {out.squared_distances.data() + q * k, k});
  }
  return out;
}

std::vector<std::uint32_t> nearest_indices(const PointCloud& query, const PointCloud& reference) {
  require_non_empty(reference, "nearest");
  std::vector<std::uint32_t> out(query.size());
  if (reference.size() <= kBruteForceLimit) {
    for (std::size_t i = 0; i < query.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        const double d = squared_distance(query[i], reference[j]);
        if (d < best) {
          best = d;
          arg = static_cast<std::uint32_t>(j);
        }
      }
      out[i] = arg;
    }
    return out;
  }
  KdTree tree(reference.points());
  for (std::size_t i = 0; i < query.size(); ++i) out[i] = tree.nearest(query[i]).first;
  return out;
}

std::vector<double> nearest_squared_distances(const PointCloud& query, const PointCloud& reference) {
  const auto idx = nearest_indices(query, reference);
  std::vector<double> out(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) out[i] = squared_distance(query[i], reference[idx[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Downsampling
// ---------------------------------------------------------------------------

std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t count, std::size_t start) {
  if (count > points.size()) throw SizeError("farthest_point_sample: count exceeds point count");
  if (count == 0) return {};
  if (start >= points.size()) throw SizeError("farthest_point_sample: start out of range");
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(points.size(), false);
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  std::size_t current = start;
  for (;;) {
    chosen.push_back(current);
    taken[current] = true;
    if (chosen.size() == count) break;
    std::size_t best = points.size();
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      dist[i] = std::min(dist[i], squared_distance(points[i], points[current]));
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    current = best;
  }
  return chosen;
}

std::vector<std::size_t> downsample_half_indices(const PointCloud& cloud, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (n < 2) throw SizeError("downsample_half: need at least 2 points, got " + std::to_string(n));
  const std::size_t target = n / 2;

  // Canonical order (lexicographic coordinates, then index) so the selected
  // coordinates are independent of the input ordering.
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), std::size_t{0});
  std::stable_sort(canon.begin(), canon.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(cloud[a], cloud[b]); });

  Vec3 lo = cloud[0], hi = cloud[0];
  for (const Vec3& p : cloud.points()) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  const double diag = std::sqrt(squared_distance(lo, hi));
  const double per_axis = std::ceil(std::cbrt(static_cast<double>(target)) - 1e-9);
  const double cell = diag / (2.0 * per_axis);

  std::map<std::array<std::int64_t, 3>, std::vector<std::size_t>> cells;
  for (std::size_t i : canon) {
    std::array<std::int64_t, 3> key{0, 0, 0};
    if (cell > 0.0) {
      for (int a = 0; a < 3; ++a) key[a] = static_cast<std::int64_t>(std::floor((cloud[i][a] - lo[a]) / cell));
    }
    cells[key].push_back(i);
  }

  std::vector<std::size_t> reps;
  reps.reserve(cells.size());
  for (const auto& [key, members] : cells) {
    Vec3 mean{0, 0, 0};
    for (std::size_t i : members) {
      for (int a = 0; a < 3; ++a) mean[a] += cloud[i][a];
    }
    for (int a = 0; a < 3; ++a) mean[a] /= static_cast<double>(members.size());
    std::size_t best = members.front();
    double best_d = squared_distance(cloud[best], mean);
    for (std::size_t i : members) {
      const double d = squared_distance(cloud[i], mean);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    reps.push_back(best);
  }
  std::stable_sort(reps.begin(), reps.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(cloud[a], cloud[b]); });

  std::vector<std::size_t> selected;
  if (reps.size() >= target) {
    std::vector<Vec3> rep_pts;
    rep_pts.reserve(reps.size());
    for (std::size_t i : reps) rep_pts.push_back(cloud[i]);
    std::size_t start = 0;
    if (seed == 0) {
      Vec3 c{0, 0, 0};
      for (const Vec3& p : cloud.points()) {
        for (int a = 0; a < 3; ++a) c[a] += p[a];
      }
      for (int a = 0; a < 3; ++a) c[a] /= static_cast<double>(n);
      double far = -1.0;
      for (std::size_t r = 0; r < rep_pts.size(); ++r) {
        const double d = squared_distance(rep_pts[r], c);
        if (d > far) {
          far = d;
          start = r;
        }
      }
    } else {
      Rng rng(seed);
      start = static_cast<std::size_t>(rng.below(rep_pts.size()));
    }
    for (std::size_t r : farthest_point_sample(rep_pts, target, start)) selected.push_back(reps[r]);
  } else {
    // Grow the representative set by farthest points among the remainder.
    selected = reps;
    std::vector<bool> taken(n, false);
    for (std::size_t i : reps) taken[i] = true;
    std::vector<std::size_t> rest;
    for (std::size_t i : canon) {
      if (!taken[i]) rest.push_back(i);
    }
    std::vector<double> dist(rest.size(), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < rest.size(); ++r) {
      for (std::size_t s : reps) dist[r] = std::min(dist[r], squared_distance(cloud[rest[r]], cloud[s]));
    }
    std::vector<bool> used(rest.size(), false);
    while (selected.size() < target) {
      std::size_t best = rest.size();
      double best_d = -1.0;
      for (std::size_t r = 0; r < rest.size(); ++r) {
        if (!used[r] && dist[r] > best_d) {
          best_d = dist[r];
          best = r;
        }
      }
      used[best] = true;
      selected.push_back(rest[best]);
      const Vec3& p = cloud[rest[best]];
      for (std::size_t r = 0; r < rest.size(); ++r) {
        if (!used[r]) dist[r] = std::min(dist[r], squared_distance(cloud[rest[r]], p));
      }
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

PointCloud downsample_half(const PointCloud& cloud, std::uint64_t seed) {
  const auto idx = downsample_half_indices(cloud, seed);
  return cloud.select(idx);
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

double chamfer(const PointCloud& p, const PointCloud& q) {
  require_non_empty(p, "chamfer");
  require_non_empty(q, "chamfer");
  double forward = 0.0;
  for (double d : nearest_squared_distances(p, q)) forward += d;
  double backward = 0.0;
  for (double d : nearest_squared_distances(q, p)) backward += d;
  return forward / static_cast<double>(p.size()) + backward / static_cast<double>(q.size());
}

double uhd(const PointCloud& p, const PointCloud& q) {
  require_non_empty(p, "uhd");
  require_non_empty(q, "uhd");
  double worst = 0.0;
  for (double d : nearest_squared_distances(p, q)) worst = std::max(worst, d);
  return std::sqrt(worst);
}

EmdResult emd_match(const PointCloud& p, const PointCloud& q) {
  if (p.size() != q.size()) {
    throw SizeError("emd: size mismatch " + std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
  require_non_empty(p, "emd");
  const std::size_t n = p.size();
  std::vector<double> cost(n * n);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = std::sqrt(squared_distance(p[i], q[j]));
      max_cost = std::max(max_cost, cost[i * n + j]);
    }
  }
  EmdResult out;
  if (n <= kEmdExactLimit) {
    out.match = hungarian(cost, n);
  } else {
    // Mean matched distance ends within epsilon of optimal.
    out.exact = false;
    out.epsilon = std::max(1e-3 * max_cost, 1e-12);
    out.match = auction(cost, n, out.epsilon);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + out.match[i]];
  out.value = total / static_cast<double>(n);
  return out;
}

double emd(const PointCloud& p, const PointCloud& q) { return emd_match(p, q).value; }

}  // namespace mpc::geometry
