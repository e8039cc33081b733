#include "mpc/generator.hpp"

#include "mpc/error.hpp"

namespace mpc::nets {

namespace {

Tensor broadcast_points(const Tensor& v, std::int64_t n) { return v.unsqueeze(1).expand({v.size(0), n, v.size(1)}); }

}  // namespace

SeedGeneratorImpl::SeedGeneratorImpl(const NetConfig& cfg) : seeds_(cfg.seeds) {
  if (cfg.seeds % cfg.local_points() != 0) throw ConfigError("seed count must be a multiple of the local point count");
  const int rate = cfg.seeds / cfg.local_points();
  lift = register_module("lift", UpsampleTransformer(cfg.local_width(), cfg.seed_width, 0, rate, cfg.attn_k, 0.0));
  const int w = cfg.seed_width + cfg.partial_width();
  feat_mlp = register_module("feat_mlp", Mlp(w, std::vector<int>{cfg.seed_hidden, cfg.seed_width}, Activation::relu, false));
  coord_mlp = register_module("coord_mlp", Mlp(w, std::vector<int>{cfg.seed_hidden, 3}, Activation::relu, false));
}

PatchSeeds SeedGeneratorImpl::forward(const PartialFeatures& pf, const Tensor& f_C) {
  const Tensor F_up = lift->forward(pf.X_L, pf.F_L).feats;
  const Tensor fc = broadcast_points(f_C, seeds_);
  PatchSeeds out;
  out.F = feat_mlp->forward(torch::cat({F_up, fc}, -1));
  out.S = coord_mlp->forward(torch::cat({out.F, fc}, -1));
  return out;
}

SeedInterpolatorImpl::SeedInterpolatorImpl(const NetConfig& cfg) : k_(cfg.interp_k), idw_(cfg.idw_interp) {
  if (!idw_) conv = register_module("conv", PointConv(cfg.seed_width, cfg.seed_width, cfg.weightnet_hidden, cfg.basis));
}

Tensor SeedInterpolatorImpl::forward(const Tensor& query, const PatchSeeds& seeds) {
  if (idw_) {
    const std::int64_t k = std::min<std::int64_t>(3, seeds.S.size(1));
    const Tensor idx = knn_index(query, seeds.S, k);
    const Tensor d2 = (gather_points(seeds.S, idx) - query.unsqueeze(2)).pow(2).sum(-1);
    const Tensor w = 1.0 / (d2 + 1e-8);
    const Tensor wn = w / w.sum(-1, true);
    return (wn.unsqueeze(-1) * gather_points(seeds.F, idx)).sum(2);
  }
  if (seeds.S.size(1) < k_) {
    throw SizeError("interpolate_seed_features: " + std::to_string(seeds.S.size(1)) + " seeds, need " +
                    std::to_string(k_));
  }
  return conv->forward_knn(seeds.S, seeds.F, query, k_);
}

DecoderImpl::DecoderImpl(const NetConfig& cfg) {
  for (int s = 0; s < cfg.stages(); ++s) {
    interps_.push_back(register_module("interp" + std::to_string(s), SeedInterpolator(cfg)));
    stages_.push_back(register_module(
        "up" + std::to_string(s),
        UpsampleTransformer(cfg.seed_width, cfg.seed_width, cfg.seed_width, cfg.up_rate, cfg.attn_k, cfg.rho[s])));
  }
}

CompletionPyramid DecoderImpl::forward(const PatchSeeds& seeds) {
  CompletionPyramid out;
  out.points.push_back(seeds.S);
  out.feats.push_back(seeds.F);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const Tensor extra = interps_[s]->forward(out.points.back(), seeds);
    Upsampled up = stages_[s]->forward(out.points.back(), out.feats.back(), extra);
    out.points.push_back(up.points);
    out.feats.push_back(up.feats);
  }
  return out;
}

GeneratorImpl::GeneratorImpl(const NetConfig& cfg) {
  cfg.validate();
  encoder = register_module("encoder", PartialEncoder(cfg));
  modulator = register_module("modulator", StyleModulator(cfg));
  seed_gen = register_module("seed_gen", SeedGenerator(cfg));
  decoder = register_module("decoder", Decoder(cfg));
}

Completion GeneratorImpl::forward(const Tensor& X_P, const Tensor& z) {
  Completion c;
  c.partial = encoder->forward(X_P);
  c.f_C = modulator->forward(c.partial.f_P, z);
  c.seeds = seed_gen->forward(c.partial, c.f_C);
  c.pyramid = decoder->forward(c.seeds);
  return c;
}

}  // namespace mpc::nets
