#include "mpc/discriminator.hpp"

#include <limits>

#include "mpc/error.hpp"

namespace mpc::nets {

DiscriminatorImpl::DiscriminatorImpl(const NetConfig& cfg, int points) : points_(points) {
  point_mlp = register_module("point_mlp", Mlp(3, cfg.disc_mlp, Activation::leaky_relu, true, cfg.leaky_slope));
  std::vector<int> head_widths = cfg.disc_head;
  head_widths.push_back(1);
  head = register_module("head", Mlp(cfg.mix_width(), head_widths, Activation::leaky_relu, false, cfg.leaky_slope));
}

DiscriminatorOutput DiscriminatorImpl::forward(const Tensor& X) {
  if (X.dim() != 3 || X.size(1) != points_ || X.size(2) != 3) {
    throw SizeError("discriminate: expected [B," + std::to_string(points_) + ",3], got " +
                    std::to_string(X.dim() == 3 ? X.size(1) : -1) + " points");
  }
  DiscriminatorOutput out;
  out.point_feats = point_mlp->forward(X);
  out.f_mix = torch::cat({std::get<0>(out.point_feats.max(1)), out.point_feats.mean(1)}, -1);
  out.score = head->forward(out.f_mix).squeeze(-1);
  return out;
}

DiscriminatorBankImpl::DiscriminatorBankImpl(const NetConfig& cfg) {
  for (int i = 0; i < cfg.levels(); ++i) {
    discs_.push_back(register_module("d" + std::to_string(i), Discriminator(cfg, cfg.level_points(i))));
  }
}

DiscriminatorOutput DiscriminatorBankImpl::forward(int level, const Tensor& X) {
  if (level < 0 || level >= levels()) throw SizeError("discriminator bank: no level " + std::to_string(level));
  return discs_[static_cast<std::size_t>(level)]->forward(X);
}

MaskedPool masked_mix_pool(const DiscriminatorOutput& out, const Tensor& X, const Tensor& X_P, double eps_mask) {
  if (!(eps_mask > 0)) throw ConfigError("masked_mix_pool: eps_mask must be positive");
  const Tensor keep = nearest_sq_distance(X, X_P) > eps_mask * eps_mask;  // [B,N]
  const Tensor count = keep.sum(1);
  const Tensor none = count == 0;
  // rows with nothing masked or everything masked pool over all points
  const Tensor full = (none | (count == X.size(1))).unsqueeze(-1);
  const Tensor k = (keep | none.unsqueeze(-1)).unsqueeze(-1);
  const Tensor& f = out.point_feats;
  const Tensor mx = std::get<0>(f.masked_fill(k.logical_not(), -std::numeric_limits<double>::infinity()).max(1));
  const Tensor mean = (f * k.to(f.dtype())).sum(1) / k.sum(1).clamp_min(1).to(f.dtype());
  MaskedPool res;
  res.f_mix = torch::where(full, out.f_mix, torch::cat({mx, mean}, -1));
  const Tensor none_cpu = none.to(torch::kCPU);
  for (std::int64_t b = 0; b < X.size(0); ++b) res.fallback.push_back(none_cpu[b].item<bool>());
  return res;
}

}  // namespace mpc::nets
