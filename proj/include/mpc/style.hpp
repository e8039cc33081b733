#pragma once

#include <vector>

#include "mpc/layers.hpp"
#include "mpc/net_config.hpp"

namespace mpc::nets {

struct StyleDistribution {
  Tensor mu;     // [B, z_dim]
  Tensor sigma;  // [B, z_dim], > 0
};

// Standard normal draws from the library Rng (bit-reproducible).
Tensor normal_tensor(at::IntArrayRef shape, std::uint64_t seed, torch::Dtype dtype);

// Per-point MLP on complete shapes, max-pooled, with mean and scale heads.
class StyleEncoderImpl : public torch::nn::Module {
 public:
  explicit StyleEncoderImpl(const NetConfig& cfg);
  // X [B, complete_points, 3]
  StyleDistribution forward(const Tensor& X);

 private:
  int points_;
  Mlp mlp{nullptr};
  torch::nn::Linear mu_head{nullptr}, sigma_head{nullptr};
};
TORCH_MODULE(StyleEncoder);

// Reparameterised draw z = mu + sigma * eps.
Tensor sample_style(const StyleDistribution& dist, std::uint64_t seed);
// z + scale * eta; returns z itself when scale == 0.
Tensor perturb_style(const Tensor& z, double scale, std::uint64_t seed);
// Per-sample KL(N(mu, sigma^2) || N(0, I)) summed over dimensions: [B].
Tensor kl_to_standard_normal(const StyleDistribution& dist);

// Mapping-network ablation: z = MLP(noise) with noise ~ N(0, I).
class MappingNetworkImpl : public torch::nn::Module {
 public:
  explicit MappingNetworkImpl(const NetConfig& cfg);
  Tensor forward(const Tensor& noise);

 private:
  Mlp mlp{nullptr};
};
TORCH_MODULE(MappingNetwork);

// mod_layers modulated convolutions on the global partial vector, ReLU in
// between; the style code enters every layer.
class StyleModulatorImpl : public torch::nn::Module {
 public:
  explicit StyleModulatorImpl(const NetConfig& cfg);
  // f_P [B, W], z [B, z_dim] -> f_C [B, W]
  Tensor forward(const Tensor& f_P, const Tensor& z);
  const std::vector<ModulatedConv>& layers() const { return layers_; }

 private:
  std::vector<ModulatedConv> layers_;
};
TORCH_MODULE(StyleModulator);

}  // namespace mpc::nets
