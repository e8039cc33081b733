#pragma once

// Independent brute-force reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mpc/geometry.hpp"
#include "mpc/rng.hpp"

namespace mpc::testing {

using geometry::PointCloud;
using geometry::Vec3;

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
  return PointCloud(std::move(pts));
}

inline double dist2(const Vec3& a, const Vec3& b) {
  double s = 0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline double min_dist2(const Vec3& x, const PointCloud& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& y : q.points()) best = std::min(best, dist2(x, y));
  return best;
}

inline double chamfer_oracle(const PointCloud& p, const PointCloud& q) {
  double a = 0, b = 0;
  for (const Vec3& x : p.points()) a += min_dist2(x, q);
  for (const Vec3& y : q.points()) b += min_dist2(y, p);
  return a / p.size() + b / q.size();
}

inline double uhd_oracle(const PointCloud& p, const PointCloud& q) {
  double worst = 0;
  for (const Vec3& x : p.points()) worst = std::max(worst, std::sqrt(min_dist2(x, q)));
  return worst;
}

// Minimum over all permutations; only for tiny clouds.
inline double emd_oracle(const PointCloud& p, const PointCloud& q) {
  std::vector<std::size_t> perm(p.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(dist2(p[i], q[perm[i]]));
    best = std::min(best, s / p.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace mpc::testing
