#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mpc/geometry.hpp"

namespace mpc::geometry {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct Face {
  std::uint32_t v[3];
  Vec3 normal;
  double offset;
  bool alive = true;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

}  // namespace

// Incremental hull. Faces are counter-clockwise seen from outside; a point is
// outside a face when its signed plane distance exceeds a scale-relative
// tolerance.
std::vector<bool> convex_hull_vertices(std::span<const Vec3> pts) {
  const std::size_t n = pts.size();
  std::vector<bool> on_hull(n, false);
  if (n < 4) {
    std::fill(on_hull.begin(), on_hull.end(), true);
    return on_hull;
  }

  double extent = 0.0;
  for (const Vec3& p : pts) extent = std::max({extent, std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
  const double tol = 1e-11 * std::max(extent, 1e-300);

  // Initial simplex from extreme points.
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (pts[i][0] < pts[i0][0]) i0 = i;
  }
  std::size_t i1 = i0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_distance(pts[i], pts[i0]);
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  std::size_t i2 = i0;
  best = -1.0;
  const Vec3 dir = sub(pts[i1], pts[i0]);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 c = cross(dir, sub(pts[i], pts[i0]));
    const double d = dot(c, c);
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  const Vec3 base_n = cross(dir, sub(pts[i2], pts[i0]));
  std::size_t i3 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(dot(base_n, sub(pts[i], pts[i0])));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  const double base_norm = std::sqrt(dot(base_n, base_n));
  if (base_norm <= tol * tol || best / std::max(base_norm, 1e-300) <= tol) {
    // Flat input: every point lies on the boundary of its planar hull.
    std::fill(on_hull.begin(), on_hull.end(), true);
    return on_hull;
  }

  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_face;
  Vec3 inner{0, 0, 0};
  for (std::size_t i : {i0, i1, i2, i3}) {
    for (int a = 0; a < 3; ++a) inner[a] += pts[i][a] / 4.0;
  }
  auto add_face = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    Face f{{a, b, c}, {}, 0.0};
    Vec3 nrm = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    const double len = std::sqrt(dot(nrm, nrm));
    if (len > 0) {
      for (double& x : nrm) x /= len;
    }
    f.normal = nrm;
    f.offset = dot(nrm, pts[a]);
    const auto id = static_cast<std::uint32_t>(faces.size());
    faces.push_back(f);
    edge_face[edge_key(a, b)] = id;
    edge_face[edge_key(b, c)] = id;
    edge_face[edge_key(c, a)] = id;
  };
  auto oriented = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    const Vec3 nrm = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    if (dot(nrm, sub(inner, pts[a])) > 0) {
      add_face(a, c, b);
    } else {
      add_face(a, b, c);
    }
  };
  const auto a = static_cast<std::uint32_t>(i0), b = static_cast<std::uint32_t>(i1),
             c = static_cast<std::uint32_t>(i2), d = static_cast<std::uint32_t>(i3);
  oriented(a, b, c);
  oriented(a, b, d);
  oriented(a, c, d);
  oriented(b, c, d);

  std::vector<std::uint32_t> visible;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
  for (std::size_t pi = 0; pi < n; ++pi) {
    if (pi == i0 || pi == i1 || pi == i2 || pi == i3) continue;
    const auto p = static_cast<std::uint32_t>(pi);
    visible.clear();
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && dot(faces[f].normal, pts[p]) - faces[f].offset > tol) visible.push_back(f);
    }
    if (visible.empty()) continue;
    for (std::uint32_t f : visible) faces[f].alive = false;
    horizon.clear();
    for (std::uint32_t f : visible) {
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t u = faces[f].v[e], w = faces[f].v[(e + 1) % 3];
        auto it = edge_face.find(edge_key(w, u));
        if (it != edge_face.end() && faces[it->second].alive) horizon.emplace_back(u, w);
      }
    }
    for (std::uint32_t f : visible) {
      for (int e = 0; e < 3; ++e) edge_face.erase(edge_key(faces[f].v[e], faces[f].v[(e + 1) % 3]));
    }
    for (auto [u, w] : horizon) add_face(u, w, p);
  }

  for (const Face& f : faces) {
    if (!f.alive) continue;
    for (std::uint32_t v : f.v) on_hull[v] = true;
  }
  return on_hull;
}

}  // namespace mpc::geometry
