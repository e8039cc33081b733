#pragma once

#include <vector>

#include "mpc/layers.hpp"
#include "mpc/net_config.hpp"

namespace mpc::nets {

struct PartialFeatures {
  Tensor F0;      // [B, partial_points, enc_mlp.back()]
  Tensor X_L;     // [B, local_points, 3]
  Tensor F_L;     // [B, local_points, local_width]
  Tensor f_P;     // [B, partial_width]
  std::vector<Tensor> level_points;  // X_0 .. X_L
};

// Per-point MLP, then enc_levels PointConv blocks doubling the width, each
// after a downsample_half except the first, then an MLP on [X_L, F_L] max-pooled to f_P.
class PartialEncoderImpl : public torch::nn::Module {
 public:
  explicit PartialEncoderImpl(const NetConfig& cfg);
  // X_P [B, partial_points, 3]
  PartialFeatures forward(const Tensor& X_P);

 private:
  NetConfig cfg_;
  Mlp f0{nullptr};
  std::vector<PointConv> blocks_;
  Mlp head{nullptr};
};
TORCH_MODULE(PartialEncoder);

}  // namespace mpc::nets
