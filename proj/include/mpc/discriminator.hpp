#pragma once

#include <vector>

#include "mpc/layers.hpp"
#include "mpc/net_config.hpp"

namespace mpc::nets {

struct DiscriminatorOutput {
  Tensor score;        // [B], unbounded
  Tensor f_mix;        // [B, 2W] = [max-pool, avg-pool]
  Tensor point_feats;  // [B, N, W]
};

// PointNet-style critic with mixed max/avg pooling.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(const NetConfig& cfg, int points);
  DiscriminatorOutput forward(const Tensor& X);
  int points() const { return points_; }

 private:
  int points_;
  Mlp point_mlp{nullptr}, head{nullptr};
};
TORCH_MODULE(Discriminator);

// One independent critic per pyramid level.
class DiscriminatorBankImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorBankImpl(const NetConfig& cfg);
  DiscriminatorOutput forward(int level, const Tensor& X);
  int levels() const { return static_cast<int>(discs_.size()); }

 private:
  std::vector<Discriminator> discs_;
};
TORCH_MODULE(DiscriminatorBank);

struct MaskedPool {
  Tensor f_mix;               // [B, 2W]
  std::vector<bool> fallback;  // per sample: every point was masked, full pooling used
};

// Mix pooling restricted to points of X whose nearest point of X_P is
// farther than eps_mask; falls back to full pooling when none is.
MaskedPool masked_mix_pool(const DiscriminatorOutput& out, const Tensor& X, const Tensor& X_P, double eps_mask);

}  // namespace mpc::nets
