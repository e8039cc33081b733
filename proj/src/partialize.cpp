#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "mpc/data.hpp"
#include "mpc/error.hpp"
#include "mpc/rng.hpp"

namespace mpc::data {

using geometry::PointCloud;
using geometry::Vec3;

std::string to_string(PartialMethod m) { return m == PartialMethod::view_cull ? "view_cull" : "part_removal"; }

PartialMethod partial_method_from_string(const std::string& s) {
  if (s == "view_cull") return PartialMethod::view_cull;
  if (s == "part_removal") return PartialMethod::part_removal;
  throw ConfigError("unknown partialization method '" + s + "'");
}

std::vector<std::size_t> resample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  if (size == 0) throw SizeError("resample: empty point cloud");
  if (n == 0) throw SizeError("resample: target size must be positive");
  Rng rng(seed);
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n <= size) {
    // Partial Fisher-Yates: the first n slots are a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
  }
  idx.reserve(n);
  while (idx.size() < n) idx.push_back(static_cast<std::size_t>(rng.below(size)));
  rng.shuffle(idx);
  return idx;
}

PointCloud resample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
  const auto idx = resample_indices(cloud.size(), n, seed);
  return cloud.select(idx);
}

Vec3 random_viewpoint(std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (len > 1e-9) return {v[0] / len, v[1] / len, v[2] / len};
  }
}

std::vector<std::size_t> visible_points(const PointCloud& cloud, const Vec3& camera, double flip_exponent) {
  const std::size_t n = cloud.size();
  std::vector<Vec3> rel(n);
  std::vector<double> len(n);
  double max_len = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rel[i] = {cloud[i][0] - camera[0], cloud[i][1] - camera[1], cloud[i][2] - camera[2]};
    len[i] = std::sqrt(geometry::squared_distance(cloud[i], camera));
    max_len = std::max(max_len, len[i]);
  }
  const double flip_radius = max_len * std::pow(10.0, flip_exponent);
  // Spherical flip about the camera; the camera itself joins the hull.
  std::vector<Vec3> flipped(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = len[i] > 0 ? 2.0 * flip_radius / len[i] - 1.0 : 0.0;
    flipped[i] = {rel[i][0] * s, rel[i][1] * s, rel[i][2] * s};
  }
  flipped[n] = {0, 0, 0};
  const auto on_hull = geometry::convex_hull_vertices(flipped);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (on_hull[i]) out.push_back(i);
  }
  return out;
}

PartialRecord partialize_view(const ShapeRecord& shape, const Vec3& viewpoint, std::uint64_t seed,
                              const ViewCullOptions& options) {
  const double vlen = std::sqrt(viewpoint[0] * viewpoint[0] + viewpoint[1] * viewpoint[1] + viewpoint[2] * viewpoint[2]);
  if (std::abs(vlen - 1.0) > 1e-6) throw ConfigError("partialize_view: viewpoint must be a unit vector");
  const PointCloud& cloud = shape.complete;
  if (cloud.empty()) throw PartializationError("partialize_view: empty shape");
  double radius = 0.0;
  for (const Vec3& p : cloud.points()) radius = std::max(radius, std::sqrt(geometry::squared_distance(p, {0, 0, 0})));
  const double dist = options.camera_distance * std::max(radius, 1e-12);
  const Vec3 camera{viewpoint[0] * dist, viewpoint[1] * dist, viewpoint[2] * dist};
  const auto visible = visible_points(cloud, camera, options.flip_exponent);
  if (visible.empty()) throw PartializationError("partialize_view: every point of " + shape.id + " was culled");

  const PointCloud kept = cloud.select(visible);
  PartialRecord rec;
  rec.id = shape.id + "|view|" + std::to_string(seed);
  rec.source_id = shape.id;
  rec.partial = resample(kept, kPartialPoints, derive_seed(seed, {0x7e5a}));
  rec.method = PartialMethod::view_cull;
  std::ostringstream vp;
  vp.precision(17);
  vp << viewpoint[0] << ',' << viewpoint[1] << ',' << viewpoint[2];
  rec.method_params = {{"viewpoint", vp.str()},
                       {"camera_distance", std::to_string(options.camera_distance)},
                       {"flip_exponent", std::to_string(options.flip_exponent)},
                       {"visible_points", std::to_string(visible.size())}};
  return rec;
}

PartialRecord partialize_parts(const ShapeRecord& shape, std::uint64_t seed) {
  if (shape.part_labels.size() != shape.complete.size()) {
    throw PartializationError("partialize_parts: labels do not match points for " + shape.id);
  }
  std::set<std::uint16_t> label_set(shape.part_labels.begin(), shape.part_labels.end());
  const auto fams = families();
  if (std::find(fams.begin(), fams.end(), shape.family) != fams.end()) {
    for (std::uint16_t l : family_parts(shape.family)) label_set.insert(l);
  }
  const std::vector<std::uint16_t> labels(label_set.begin(), label_set.end());
  if (labels.size() < 2) throw PartializationError("partialize_parts: " + shape.id + " has fewer than 2 parts");
  if (labels.size() > 16) throw PartializationError("partialize_parts: too many part labels");

  Rng rng(derive_seed(seed, {0x9a27}));
  const std::uint64_t subsets = (std::uint64_t{1} << labels.size()) - 2;  // non-empty strict subsets
  for (int attempt = 0; attempt < kPartRemovalAttempts; ++attempt) {
    const std::uint64_t mask = 1 + rng.below(subsets);
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < shape.part_labels.size(); ++i) {
      const auto pos = std::lower_bound(labels.begin(), labels.end(), shape.part_labels[i]) - labels.begin();
      if (((mask >> pos) & 1U) == 0) survivors.push_back(i);
    }
    if (survivors.size() < kMinSurvivors) continue;

    std::string removed;
    for (std::size_t b = 0; b < labels.size(); ++b) {
      if ((mask >> b) & 1U) {
        if (!removed.empty()) removed += ',';
        removed += std::to_string(labels[b]);
      }
    }
    PartialRecord rec;
    rec.id = shape.id + "|parts|" + std::to_string(seed);
    rec.source_id = shape.id;
    rec.partial = resample(shape.complete.select(survivors), kPartialPoints, derive_seed(seed, {0x7e5b}));
    rec.method = PartialMethod::part_removal;
    rec.method_params = {{"removed_labels", removed}, {"attempt", std::to_string(attempt)}};
    return rec;
  }
  throw PartializationError("partialize_parts: no label subset of " + shape.id + " leaves " +
                            std::to_string(kMinSurvivors) + " points after " +
                            std::to_string(kPartRemovalAttempts) + " attempts");
}

}  // namespace mpc::data
