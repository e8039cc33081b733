#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpc/data.hpp"
#include "mpc/geometry.hpp"
#include "mpc/model.hpp"

namespace mpc::nets {

enum class Protocol { standard, pvd_dagger };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

inline constexpr int kDefaultK = 10;
inline constexpr std::size_t kPvdPoints = 1024;

// K completions (level 3) of one partial with z ~ N(0, I); deterministic in
// seed.
std::vector<geometry::PointCloud> sample_completions(Model& model, const geometry::PointCloud& partial, int K,
                                                     std::uint64_t seed);
// Completions for explicit style codes z [K, z_dim].
std::vector<geometry::PointCloud> complete_with_styles(Model& model, const geometry::PointCloud& partial,
                                                       const Tensor& z);
// All pyramid levels for explicit style codes: result[k][level].
std::vector<std::vector<geometry::PointCloud>> complete_levels(Model& model, const geometry::PointCloud& partial,
                                                               const Tensor& z);

struct InputMetrics {
  std::string id;
  double tmd = 0.0;
  std::optional<double> uhd;
};

struct MetricsReport {
  Protocol protocol = Protocol::standard;
  int K = kDefaultK;
  std::uint64_t seed = 0;
  double mmd = 0.0;
  double tmd = 0.0;
  std::optional<double> uhd;  // omitted under pvd_dagger
  std::vector<InputMetrics> per_input;
  std::string checkpoint_hash;

  double mmd_scaled() const;
  double tmd_scaled() const;
  std::optional<double> uhd_scaled() const;
  nlohmann::json to_json() const;
};

// Metrics for given completions. standard: on the completions as they are.
// pvd_dagger: each completion resampled to 1024 points (seeded per input and
// completion) for TMD; MMD on that subsample concatenated with the partial;
// no UHD.
MetricsReport evaluate_completions(const std::vector<std::string>& ids,
                                   const std::vector<geometry::PointCloud>& partials,
                                   const std::vector<std::vector<geometry::PointCloud>>& completions,
                                   const std::vector<geometry::PointCloud>& test_set, Protocol protocol,
                                   std::uint64_t seed);

// Resample seed of completion k of input i under pvd_dagger.
std::uint64_t pvd_resample_seed(std::uint64_t seed, std::size_t input, std::size_t k);

struct EvalOptions {
  Protocol protocol = Protocol::standard;
  int K = kDefaultK;
  std::uint64_t seed = 0;
  // When set, every completion uses this single style code [1, z_dim].
  std::optional<Tensor> fixed_style;
};

MetricsReport evaluate(Model& model, const std::vector<data::PartialRecord>& partials,
                       const std::vector<geometry::PointCloud>& test_set, const EvalOptions& options);

}  // namespace mpc::nets
