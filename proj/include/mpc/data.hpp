#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mpc/geometry.hpp"

namespace mpc::data {

inline constexpr std::size_t kCompletePoints = 2048;
inline constexpr std::size_t kPartialPoints = 1024;
// Part removal retries a new label subset when fewer points than this survive.
inline constexpr std::size_t kMinSurvivors = 64;
inline constexpr int kPartRemovalAttempts = 8;

struct ShapeRecord {
  std::string id;
  geometry::PointCloud complete;
  std::vector<std::uint16_t> part_labels;
  std::string family;
  std::vector<double> latent_factors;

  friend bool operator==(const ShapeRecord&, const ShapeRecord&) = default;
};

enum class PartialMethod { view_cull, part_removal };

std::string to_string(PartialMethod m);
PartialMethod partial_method_from_string(const std::string& s);

struct PartialRecord {
  std::string id;
  std::string source_id;
  geometry::PointCloud partial;
  PartialMethod method = PartialMethod::view_cull;
  std::map<std::string, std::string> method_params;

  friend bool operator==(const PartialRecord&, const PartialRecord&) = default;
};

// Documented range of one latent factor of a procedural family.
struct FactorSpec {
  std::string name;
  double lo;
  double hi;
  bool integral = false;
};

std::vector<std::string> families();
// Throws ConfigError for an unknown family.
const std::vector<FactorSpec>& factor_specs(const std::string& family);

// Deterministic in (family, seed): 2048 area-uniform surface samples,
// centred on the origin with maximum radius 1 (coordinates rounded to
// float32 so the record survives the container unchanged).
ShapeRecord generate_shape(const std::string& family, std::uint64_t seed);

// Every part label a family can emit; a shape may lack some (a box without
// its lid).
const std::vector<std::uint16_t>& family_parts(const std::string& family);

std::string shape_id(const std::string& family, std::uint64_t seed);
// Family encoded in a shape id ("family:seed").
std::string family_of(const std::string& shape_id);

// Translates to the centroid and scales to unit max radius; rounds to float32.
geometry::PointCloud normalize(const geometry::PointCloud& cloud);

// n <= N: uniform subsample without replacement. n > N: every point once
// plus n - N draws with replacement, shuffled.
geometry::PointCloud resample(const geometry::PointCloud& cloud, std::size_t n, std::uint64_t seed);
std::vector<std::size_t> resample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

struct ViewCullOptions {
  double camera_distance = 3.0;  // in units of the shape's max radius
  double flip_exponent = 2.0;    // spherical flip radius = max |p - C| * 10^exponent
};

// Hidden point removal by spherical flipping from a camera on the viewpoint
// ray, then resampled to 1024 points.
PartialRecord partialize_view(const ShapeRecord& shape, const geometry::Vec3& viewpoint, std::uint64_t seed,
                              const ViewCullOptions& options = {});
// Indices of the points visible from `camera` (HPR), in input order.
std::vector<std::size_t> visible_points(const geometry::PointCloud& cloud, const geometry::Vec3& camera,
                                        double flip_exponent);

// Removes a random non-empty strict subset of part labels; survivors are
// resampled to 1024 points. For a registered family the subset is drawn from
// the family's labels, so removing a part the shape lacks is possible and a
// lid-removed box looks like a box that never had one.
PartialRecord partialize_parts(const ShapeRecord& shape, std::uint64_t seed);

// Uniformly random unit vector.
geometry::Vec3 random_viewpoint(std::uint64_t seed);

// 90/10 split by a hash of the shape id.
bool is_test_split(const std::string& shape_id);

}  // namespace mpc::data
