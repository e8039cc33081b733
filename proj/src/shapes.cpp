// Procedural shape families with labelled parts and known generative factors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "mpc/data.hpp"
#include "mpc/error.hpp"
#include "mpc/rng.hpp"

namespace mpc::data {

using geometry::PointCloud;
using geometry::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
Vec3 unit(const Vec3& a) { return scale(a, 1.0 / norm(a)); }

// Two unit vectors completing `axis` to an orthonormal frame.
std::pair<Vec3, Vec3> frame(const Vec3& axis) {
  const Vec3 helper = std::abs(axis[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 e1 = unit(cross(axis, helper));
  return {e1, cross(axis, e1)};
}

// A labelled surface patch that can be sampled uniformly by area.
struct Surface {
  std::uint16_t label;
  double area;
  std::function<Vec3(Rng&)> sample;
};

Surface parallelogram(std::uint16_t label, const Vec3& origin, const Vec3& u, const Vec3& v) {
  return {label, norm(cross(u, v)), [=](Rng& rng) {
            const double a = rng.uniform();
            const double b = rng.uniform();
            return add(origin, add(scale(u, a), scale(v, b)));
          }};
}

// Axis-aligned rectangle in the plane z = height, centred at (cx, cy).
Surface horizontal_rect(std::uint16_t label, double cx, double cy, double height, double w, double d) {
  return parallelogram(label, {cx - w / 2, cy - d / 2, height}, {w, 0, 0}, {0, d, 0});
}

// Lateral surface of a frustum from `base` along unit `axis`; radii r0 at the
// base and r1 at the top. A cylinder when r0 == r1.
Surface frustum(std::uint16_t label, const Vec3& base, const Vec3& axis, double r0, double r1, double h) {
  const double slant = std::sqrt((r1 - r0) * (r1 - r0) + h * h);
  const auto [e1, e2] = frame(axis);
  return {label, kPi * (r0 + r1) * slant, [=](Rng& rng) {
            // Inverse CDF of the radius-proportional height density.
            const double u = rng.uniform();
            double t = u;
            const double dr = r1 - r0;
            if (std::abs(dr) > 1e-12 * (r0 + r1)) {
              const double mean_r = 0.5 * (r0 + r1);
              t = (-r0 + std::sqrt(r0 * r0 + 2.0 * dr * mean_r * u)) / dr;
            }
            const double r = r0 + dr * t;
            const double theta = 2.0 * kPi * rng.uniform();
            const Vec3 radial = add(scale(e1, r * std::cos(theta)), scale(e2, r * std::sin(theta)));
            return add(add(base, scale(axis, h * t)), radial);
          }};
}

Surface segment_tube(std::uint16_t label, const Vec3& from, const Vec3& to, double radius) {
  const Vec3 d = add(to, scale(from, -1.0));
  return frustum(label, from, unit(d), radius, radius, norm(d));
}

struct Family {
  std::vector<FactorSpec> factors;
  std::vector<std::uint16_t> parts;  // every label the family can emit
  std::function<std::vector<Surface>(const std::vector<double>&)> build;
};

// Open box (bottom + four walls) with an optional floating lid. Lid presence
// is itself a factor so a lid-removed box is indistinguishable from a
// lid-less one.
Family box_lid() {
  Family f;
  f.factors = {{"width", 0.6, 1.2},      {"depth", 0.6, 1.2},     {"height", 0.4, 1.0},
               {"lid_present", 0, 1, true}, {"lid_gap", 0.05, 0.4}, {"lid_scale", 0.6, 1.0}};
  f.parts = {0, 1, 2};
  f.build = [](const std::vector<double>& x) {
    const double w = x[0], d = x[1], h = x[2];
    std::vector<Surface> s;
    s.push_back(horizontal_rect(0, 0, 0, 0, w, d));
    s.push_back(parallelogram(1, {-w / 2, -d / 2, 0}, {w, 0, 0}, {0, 0, h}));
    s.push_back(parallelogram(1, {-w / 2, d / 2, 0}, {w, 0, 0}, {0, 0, h}));
    s.push_back(parallelogram(1, {-w / 2, -d / 2, 0}, {0, d, 0}, {0, 0, h}));
    s.push_back(parallelogram(1, {w / 2, -d / 2, 0}, {0, d, 0}, {0, 0, h}));
    if (x[3] > 0.5) s.push_back(horizontal_rect(2, 0, 0, h * (1.0 + x[4]), w * x[5], d * x[5]));
    return s;
  };
  return f;
}

// Three splayed legs, a vertical pole and a conical shade.
Family tripod_lamp() {
  Family f;
  f.factors = {{"pole_height", 0.8, 1.6},
               {"shade_radius", 0.25, 0.6},
               {"shade_height", 0.2, 0.5},
               {"leg_spread", 0.3, 0.6}};
  f.parts = {0, 1, 2};
  f.build = [](const std::vector<double>& x) {
    const double pole_h = x[0], shade_r = x[1], shade_h = x[2], spread = x[3];
    const double hub = 0.25;
    std::vector<Surface> s;
    for (int k = 0; k < 3; ++k) {
      const double a = 2.0 * kPi * k / 3.0;
      s.push_back(segment_tube(0, {spread * std::cos(a), spread * std::sin(a), 0}, {0, 0, hub}, 0.025));
    }
    s.push_back(segment_tube(1, {0, 0, hub}, {0, 0, pole_h}, 0.03));
    s.push_back(frustum(2, {0, 0, pole_h - 0.6 * shade_h}, {0, 0, 1}, shade_r, 0.5 * shade_r, shade_h));
    return s;
  };
  return f;
}

// Slab top on 3-6 legs placed evenly on an ellipse under the top.
Family table() {
  Family f;
  f.factors = {{"top_width", 0.8, 1.6},
               {"top_depth", 0.6, 1.2},
               {"leg_height", 0.5, 1.0},
               {"leg_count", 3, 6, true},
               {"top_thickness", 0.03, 0.08}};
  f.parts = {0, 1};
  f.build = [](const std::vector<double>& x) {
    const double w = x[0], d = x[1], lh = x[2], t = x[4];
    const int legs = static_cast<int>(std::lround(x[3]));
    std::vector<Surface> s;
    s.push_back(horizontal_rect(0, 0, 0, lh + t, w, d));
    s.push_back(horizontal_rect(0, 0, 0, lh, w, d));
    s.push_back(parallelogram(0, {-w / 2, -d / 2, lh}, {w, 0, 0}, {0, 0, t}));
    s.push_back(parallelogram(0, {-w / 2, d / 2, lh}, {w, 0, 0}, {0, 0, t}));
    s.push_back(parallelogram(0, {-w / 2, -d / 2, lh}, {0, d, 0}, {0, 0, t}));
    s.push_back(parallelogram(0, {w / 2, -d / 2, lh}, {0, d, 0}, {0, 0, t}));
    for (int k = 0; k < legs; ++k) {
      const double a = 2.0 * kPi * (k + 0.5) / legs;
      const double lx = 0.4 * w * std::cos(a), ly = 0.4 * d * std::sin(a);
      s.push_back(segment_tube(1, {lx, ly, 0}, {lx, ly, lh}, 0.035));
    }
    return s;
  };
  return f;
}

const std::map<std::string, Family>& registry() {
  static const std::map<std::string, Family> r = {
      {"box-lid", box_lid()}, {"tripod-lamp", tripod_lamp()}, {"table", table()}};
  return r;
}

const Family& lookup(const std::string& family) {
  const auto& r = registry();
  auto it = r.find(family);
  if (it == r.end()) throw ConfigError("unknown shape family '" + family + "'");
  return it->second;
}

}  // namespace

std::vector<std::string> families() {
  std::vector<std::string> out;
  for (const auto& [name, f] : registry()) out.push_back(name);
  return out;
}

const std::vector<FactorSpec>& factor_specs(const std::string& family) { return lookup(family).factors; }

const std::vector<std::uint16_t>& family_parts(const std::string& family) { return lookup(family).parts; }

std::string shape_id(const std::string& family, std::uint64_t seed) { return family + ":" + std::to_string(seed); }

std::string family_of(const std::string& id) { return id.substr(0, id.find(':')); }

PointCloud normalize(const PointCloud& cloud) {
  if (cloud.empty()) throw SizeError("normalize: empty point cloud");
  Vec3 c{0, 0, 0};
  for (const Vec3& p : cloud.points()) c = add(c, p);
  c = scale(c, 1.0 / static_cast<double>(cloud.size()));
  double radius = 0.0;
  for (const Vec3& p : cloud.points()) radius = std::max(radius, norm(add(p, scale(c, -1.0))));
  const double s = radius > 0 ? 1.0 / radius : 1.0;
  // Stored through a float buffer: gcc 11 -O3 folds an inline
  // double->float->double round trip on vectorised lanes.
  std::vector<float> xyz;
  xyz.reserve(3 * cloud.size());
  for (const Vec3& p : cloud.points()) {
    const Vec3 q = scale(add(p, scale(c, -1.0)), s);
    for (double v : q) xyz.push_back(static_cast<float>(v));
  }
  return PointCloud::from_floats(xyz);
}

ShapeRecord generate_shape(const std::string& family, std::uint64_t seed) {
  const Family& fam = lookup(family);
  Rng rng(derive_seed(seed, {0x5ba9e}));
  std::vector<double> factors;
  for (const FactorSpec& spec : fam.factors) {
    if (spec.integral) {
      const auto span = static_cast<std::uint64_t>(std::lround(spec.hi - spec.lo)) + 1;
      factors.push_back(spec.lo + static_cast<double>(rng.below(span)));
    } else {
      factors.push_back(static_cast<float>(rng.uniform(spec.lo, spec.hi)));
    }
  }
  const std::vector<Surface> surfaces = fam.build(factors);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Surface& s : surfaces) {
    total += s.area;
    cumulative.push_back(total);
  }
  std::vector<Vec3> pts;
  std::vector<std::uint16_t> labels;
  pts.reserve(kCompletePoints);
  labels.reserve(kCompletePoints);
  for (std::size_t i = 0; i < kCompletePoints; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), surfaces.size() - 1);
    pts.push_back(surfaces[k].sample(rng));
    labels.push_back(surfaces[k].label);
  }
  ShapeRecord rec;
  rec.id = shape_id(family, seed);
  rec.complete = normalize(PointCloud(std::move(pts)));
  rec.part_labels = std::move(labels);
  rec.family = family;
  rec.latent_factors = std::move(factors);
  return rec;
}

bool is_test_split(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h % 10 == 0;
}

}  // namespace mpc::data
