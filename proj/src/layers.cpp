#include "mpc/layers.hpp"

#include <cmath>

#include "mpc/error.hpp"

namespace mpc::nets {

Tensor activate(const Tensor& x, Activation act, double slope) {
  switch (act) {
    case Activation::relu:
      return torch::relu(x);
    case Activation::leaky_relu:
      return torch::leaky_relu(x, slope);
    case Activation::none:
      break;
  }
  return x;
}

MlpImpl::MlpImpl(int in, std::vector<int> widths, Activation act, bool act_last, double slope)
    : widths_(std::move(widths)), act_(act), act_last_(act_last), slope_(slope) {
  if (widths_.empty()) throw ConfigError("Mlp: no layers");
  int prev = in;
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    layers_.push_back(register_module("l" + std::to_string(i), torch::nn::Linear(prev, widths_[i])));
    prev = widths_[i];
  }
}

Tensor MlpImpl::forward(const Tensor& x) {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h);
    if (i + 1 < layers_.size() || act_last_) h = activate(h, act_, slope_);
  }
  return h;
}

PointConvImpl::PointConvImpl(int in_width, int out_width, int hidden, int basis)
    : in_width_(in_width), basis_(basis) {
  weight_hidden = register_module("weight_hidden", torch::nn::Linear(3, hidden));
  weight_out = register_module("weight_out", torch::nn::Linear(hidden, basis));
  proj = register_module("proj", torch::nn::Linear(in_width * basis, out_width));
}

Tensor PointConvImpl::forward(const Tensor& points_in, const Tensor& feats_in, const Tensor& points_out,
                              const Tensor& idx) {
  if (feats_in.size(-1) != in_width_) throw SizeError("PointConv: input feature width mismatch");
  const Tensor rel = gather_points(points_in, idx) - points_out.unsqueeze(2);
  const Tensor basis = weight_out->forward(torch::relu(weight_hidden->forward(rel)));  // [B,M,k,W]
  const Tensor f = gather_points(feats_in, idx);                                       // [B,M,k,C]
  const Tensor agg = torch::matmul(f.transpose(-1, -2), basis);                        // [B,M,C,W]
  return proj->forward(agg.flatten(-2));
}

Tensor PointConvImpl::forward_knn(const Tensor& points_in, const Tensor& feats_in, const Tensor& points_out,
                                  std::int64_t k) {
  return forward(points_in, feats_in, points_out, knn_index(points_out, points_in, k));
}

Tensor modulate_weights(const Tensor& w, const Tensor& s, double eps) {
  const Tensor wp = w.unsqueeze(0) * s.unsqueeze(1);
  return wp * torch::rsqrt(wp.pow(2).sum(-1, true) + eps);
}

ModulatedConvImpl::ModulatedConvImpl(int in_width, int out_width, int z_dim) {
  weight = register_parameter("weight", torch::empty({out_width, in_width}));
  bias = register_parameter("bias", torch::zeros({out_width}));
  affine = register_module("affine", torch::nn::Linear(z_dim, in_width));
}

Tensor ModulatedConvImpl::forward(const Tensor& x, const Tensor& z) {
  const Tensor w = modulate_weights(weight, styles(z), kEps);
  return torch::bmm(w, x.unsqueeze(-1)).squeeze(-1) + bias;
}

UpsampleTransformerImpl::UpsampleTransformerImpl(int in_width, int width, int extra_width, int rate, int k,
                                                 double rho)
    : width_(width), rate_(rate), k_(k), rho_(rho) {
  if (rate < 1) throw ConfigError("UpsampleTransformer: rate must be at least 1");
  if (k < 1) throw ConfigError("UpsampleTransformer: k must be at least 1");
  in_proj = register_module("in_proj", torch::nn::Linear(in_width, width));
  if (extra_width > 0) extra_proj = register_module("extra_proj", torch::nn::Linear(extra_width, width));
  query = register_module("query", torch::nn::Linear(width, width));
  key = register_module("key", torch::nn::Linear(width, width));
  value = register_module("value", torch::nn::Linear(width, width));
  pos_hidden = register_module("pos_hidden", torch::nn::Linear(3, width));
  pos_out = register_module("pos_out", torch::nn::Linear(width, width));
  pos_bias = register_module("pos_bias", torch::nn::Linear(width, 1));
  out_proj = register_module("out_proj", torch::nn::Linear(width, width));
  child_proj = register_module("child_proj", torch::nn::Linear(width, width * rate));
  if (rho > 0) offset = register_module("offset", torch::nn::Linear(width, 3));
}

Upsampled UpsampleTransformerImpl::forward(const Tensor& points, const Tensor& feats,
                                           const std::optional<Tensor>& extra) {
  const std::int64_t B = points.size(0);
  const std::int64_t N = points.size(1);
  Tensor h = in_proj->forward(feats);
  if (extra) {
    if (!extra_proj) throw SizeError("UpsampleTransformer: layer takes no side input");
    h = h + extra_proj->forward(*extra);
  }
  const std::int64_t k = std::min<std::int64_t>(k_, N);
  const Tensor idx = knn_index(points, points, k);
  const Tensor delta = points.unsqueeze(2) - gather_points(points, idx);
  const Tensor pos = pos_out->forward(torch::relu(pos_hidden->forward(delta)));  // [B,N,k,C]
  const Tensor q = query->forward(h);
  const Tensor keys = gather_points(key->forward(h), idx) + pos;
  const Tensor vals = gather_points(value->forward(h), idx) + pos;
  const Tensor logits = (q.unsqueeze(2) * keys).sum(-1) / std::sqrt(static_cast<double>(width_)) +
                        pos_bias->forward(pos).squeeze(-1);
  const Tensor attn = torch::softmax(logits, -1);
  const Tensor attended = (attn.unsqueeze(-1) * vals).sum(2);
  const Tensor y = h + out_proj->forward(torch::relu(attended));
  const Tensor kids = child_proj->forward(torch::relu(y)).view({B, N, rate_, width_}) + y.unsqueeze(2);

  Upsampled out;
  out.feats = kids.reshape({B, N * rate_, width_});
  if (offset) {
    const Tensor shift = torch::tanh(offset->forward(torch::relu(out.feats))) * rho_;
    out.points = points.repeat_interleave(rate_, 1) + shift;
  }
  return out;
}

}  // namespace mpc::nets
