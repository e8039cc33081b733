#pragma once

// Differentiable building blocks shared by the networks: ordered parameter
// sets, finite-difference verification, and batched point operations whose
// index selection (neighbours, matches) runs on detached coordinates while
// the gathered values stay on the autograd tape.

#include <torch/torch.h>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mpc/geometry.hpp"

namespace mpc::nets {

using torch::Tensor;

using NamedTensor = std::pair<std::string, Tensor>;

// Ordered name -> tensor view over module parameters. Names are unique and
// iteration order is the registration order.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::vector<NamedTensor> items);
  static ParameterSet of(const torch::nn::Module& module, const std::string& prefix = "");

  const std::vector<NamedTensor>& items() const noexcept { return items_; }
  std::vector<Tensor> tensors() const;
  std::size_t size() const noexcept { return items_.size(); }
  std::int64_t coordinate_count() const;
  const Tensor& at(const std::string& name) const;
  void append(const ParameterSet& other);

 private:
  std::vector<NamedTensor> items_;
};

// Deterministic initialisation keyed by parameter name: weights uniform with
// variance 1/fan_in, biases zero, modulation affine biases one.
void init_parameters(const ParameterSet& params, std::uint64_t seed);

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double gradient_norm = 0.0;  // of the analytic gradient over all coordinates
  std::size_t probes = 0;
};

// Central differences at `probes` random coordinates against autograd.
// Relative error is |fd - an| / max(|fd|, |an|, 1e-6 * max(1, |f|)).
// Throws NumericError when f is non-finite; ConfigError when the
// perturbation is outside [1e-6, 1e-3].
GradCheckResult grad_check(const std::function<Tensor()>& f, const ParameterSet& params, double perturbation,
                           std::uint64_t seed, std::size_t probes = 64);

// [N,3] or [B,N,3] <-> point clouds.
Tensor points_tensor(const geometry::PointCloud& cloud, torch::Dtype dtype);
Tensor batch_points(const std::vector<geometry::PointCloud>& clouds, torch::Dtype dtype);
geometry::PointCloud cloud_of(const Tensor& points);

// x [B,N,C], idx [B,M,k] -> [B,M,k,C]. idx [B,M] -> [B,M,C].
Tensor gather_points(const Tensor& x, const Tensor& idx);

// k nearest `ref` points of each `query` point, computed on detached
// coordinates: int64 [B,M,k]. Throws SizeError when k exceeds N.
Tensor knn_index(const Tensor& query, const Tensor& ref, std::int64_t k);
// Indices of the downsample_half selection per batch element: int64 [B,N/2].
Tensor downsample_index(const Tensor& points);

// Per-sample distances [B]; gradients flow through the selected pairs.
// chamfer: mean squared nearest distance, summed over both directions.
Tensor chamfer(const Tensor& a, const Tensor& b);
// uhd: max over a of the (non-squared) nearest distance into b.
Tensor uhd(const Tensor& a, const Tensor& b);
// emd: mean matched distance under the optimal bijection (sizes equal).
Tensor emd(const Tensor& a, const Tensor& b);
// Nearest squared distance of every `query` point to `ref`, no gradient: [B,M].
Tensor nearest_sq_distance(const Tensor& query, const Tensor& ref);

}  // namespace mpc::nets
