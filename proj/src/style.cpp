#include "mpc/style.hpp"

#include "mpc/error.hpp"
#include "mpc/rng.hpp"

namespace mpc::nets {

Tensor normal_tensor(at::IntArrayRef shape, std::uint64_t seed, torch::Dtype dtype) {
  auto t = torch::empty(shape, torch::kFloat64);
  Rng rng(seed);
  double* p = t.data_ptr<double>();
  for (std::int64_t i = 0; i < t.numel(); ++i) p[i] = rng.normal();
  return t.to(dtype);
}

StyleEncoderImpl::StyleEncoderImpl(const NetConfig& cfg) : points_(cfg.complete_points) {
  mlp = register_module("mlp", Mlp(3, cfg.style_mlp, Activation::relu, false));
  mu_head = register_module("mu_head", torch::nn::Linear(cfg.style_mlp.back(), cfg.z_dim));
  sigma_head = register_module("sigma_head", torch::nn::Linear(cfg.style_mlp.back(), cfg.z_dim));
}

StyleDistribution StyleEncoderImpl::forward(const Tensor& X) {
  if (X.dim() != 3 || X.size(1) != points_ || X.size(2) != 3) {
    throw SizeError("style_encode: expected [B," + std::to_string(points_) + ",3] input");
  }
  const Tensor f_S = std::get<0>(mlp->forward(X).max(1));
  return {mu_head->forward(f_S), torch::softplus(sigma_head->forward(f_S)) + 1e-4};
}

Tensor sample_style(const StyleDistribution& dist, std::uint64_t seed) {
  return dist.mu + dist.sigma * normal_tensor(dist.mu.sizes(), seed, dist.mu.scalar_type());
}

Tensor perturb_style(const Tensor& z, double scale, std::uint64_t seed) {
  if (scale < 0) throw ConfigError("perturb_style: scale must be non-negative");
  if (scale == 0) return z;
  return z + scale * normal_tensor(z.sizes(), seed, z.scalar_type());
}

Tensor kl_to_standard_normal(const StyleDistribution& dist) {
  return 0.5 * (dist.mu.pow(2) + dist.sigma.pow(2) - 1.0 - 2.0 * torch::log(dist.sigma)).sum(-1);
}

MappingNetworkImpl::MappingNetworkImpl(const NetConfig& cfg) {
  std::vector<int> widths = cfg.mapping_mlp;
  widths.push_back(cfg.z_dim);
  mlp = register_module("mlp", Mlp(cfg.z_dim, widths, Activation::leaky_relu, false));
}

Tensor MappingNetworkImpl::forward(const Tensor& noise) { return mlp->forward(noise); }

StyleModulatorImpl::StyleModulatorImpl(const NetConfig& cfg) {
  const int w = cfg.partial_width();
  for (int i = 0; i < cfg.mod_layers; ++i) {
    layers_.push_back(register_module("mod" + std::to_string(i), ModulatedConv(w, w, cfg.z_dim)));
  }
}

Tensor StyleModulatorImpl::forward(const Tensor& f_P, const Tensor& z) {
  Tensor h = f_P;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, z);
    if (i + 1 < layers_.size()) h = torch::relu(h);
  }
  return h;
}

}  // namespace mpc::nets
