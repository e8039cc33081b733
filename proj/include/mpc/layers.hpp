#pragma once

#include <torch/torch.h>

#include <optional>
#include <vector>

#include "mpc/tensor.hpp"

namespace mpc::nets {

enum class Activation { relu, leaky_relu, none };

Tensor activate(const Tensor& x, Activation act, double slope = 0.2);

// Shared per-point (or per-vector) perceptron over the last dimension.
// `act_last` decides whether the final layer is followed by the activation.
class MlpImpl : public torch::nn::Module {
 public:
  MlpImpl(int in, std::vector<int> widths, Activation act = Activation::relu, bool act_last = false,
          double slope = 0.2);
  Tensor forward(const Tensor& x);
  int out_width() const { return widths_.back(); }

 private:
  std::vector<int> widths_;
  Activation act_;
  bool act_last_;
  double slope_;
  std::vector<torch::nn::Linear> layers_;
};
TORCH_MODULE(Mlp);

// Continuous convolution over k neighbours: a weight-net maps each relative
// coordinate to a `basis`-dim vector, neighbour features are contracted
// against it (C_in x basis), and a linear layer maps that to C_out.
class PointConvImpl : public torch::nn::Module {
 public:
  PointConvImpl(int in_width, int out_width, int hidden = 16, int basis = 16);
  // points_in [B,N,3], feats_in [B,N,C_in], points_out [B,M,3], idx [B,M,k]
  // (neighbours of each output point among the inputs). Returns [B,M,C_out].
  Tensor forward(const Tensor& points_in, const Tensor& feats_in, const Tensor& points_out, const Tensor& idx);
  // Same, with the k nearest inputs of each output point.
  Tensor forward_knn(const Tensor& points_in, const Tensor& feats_in, const Tensor& points_out, std::int64_t k);

  torch::nn::Linear weight_hidden{nullptr}, weight_out{nullptr}, proj{nullptr};

 private:
  int in_width_;
  int basis_;
};
TORCH_MODULE(PointConv);

// Demodulated weights for a batch of style codes: w [out,in], s [B,in] ->
// [B,out,in] with w'_ji = s_i w_ji and w''_ji = w'_ji / sqrt(sum_i w'^2 + eps).
Tensor modulate_weights(const Tensor& w, const Tensor& s, double eps = 1e-8);

// Width-preserving or not, footprint-1 convolution whose weights are
// modulated per sample by an affine map of the style code.
class ModulatedConvImpl : public torch::nn::Module {
 public:
  static constexpr double kEps = 1e-8;
  ModulatedConvImpl(int in_width, int out_width, int z_dim);
  // x [B,in], z [B,z_dim] -> [B,out]
  Tensor forward(const Tensor& x, const Tensor& z);
  Tensor styles(const Tensor& z) { return affine->forward(z); }

  Tensor weight, bias;
  torch::nn::Linear affine{nullptr};
};
TORCH_MODULE(ModulatedConv);

struct Upsampled {
  Tensor points;  // [B, N*r, 3]; undefined when the layer has no offset head
  Tensor feats;   // [B, N*r, C]
};

// Local self-attention over k neighbours with a learned relative-position
// encoding, followed by r child projection heads. Child j of point n sits at
// output index n*r + j; its coordinate is the parent plus tanh(.)*rho.
class UpsampleTransformerImpl : public torch::nn::Module {
 public:
  // extra_width > 0 adds a projected side input (seed interpolation) to the
  // layer input; rho <= 0 builds no offset head.
  UpsampleTransformerImpl(int in_width, int width, int extra_width, int rate, int k, double rho);
  Upsampled forward(const Tensor& points, const Tensor& feats, const std::optional<Tensor>& extra = std::nullopt);

  int rate() const { return rate_; }
  torch::nn::Linear offset{nullptr};

 private:
  int width_;
  int rate_;
  int k_;
  double rho_;
  torch::nn::Linear in_proj{nullptr}, extra_proj{nullptr}, query{nullptr}, key{nullptr}, value{nullptr},
      pos_hidden{nullptr}, pos_out{nullptr}, pos_bias{nullptr}, out_proj{nullptr}, child_proj{nullptr};
};
TORCH_MODULE(UpsampleTransformer);

}  // namespace mpc::nets
