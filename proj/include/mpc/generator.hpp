#pragma once

#include <vector>

#include "mpc/layers.hpp"
#include "mpc/net_config.hpp"
#include "mpc/partial_encoder.hpp"
#include "mpc/style.hpp"

namespace mpc::nets {

struct PatchSeeds {
  Tensor S;  // [B, seeds, 3]
  Tensor F;  // [B, seeds, seed_width]
};

struct CompletionPyramid {
  std::vector<Tensor> points;  // G_0 .. G_stages, [B, level_points(i), 3]
  std::vector<Tensor> feats;   // per-level features, [B, level_points(i), seed_width]
};

struct Completion {
  PartialFeatures partial;
  Tensor f_C;
  PatchSeeds seeds;
  CompletionPyramid pyramid;
};

// Lifts (X_L, F_L) with an upsample transformer, then regresses seed
// features and coordinates from the lifted features and f_C.
class SeedGeneratorImpl : public torch::nn::Module {
 public:
  explicit SeedGeneratorImpl(const NetConfig& cfg);
  PatchSeeds forward(const PartialFeatures& pf, const Tensor& f_C);

 private:
  int seeds_;
  UpsampleTransformer lift{nullptr};
  Mlp feat_mlp{nullptr}, coord_mlp{nullptr};
};
TORCH_MODULE(SeedGenerator);

// Seed features at arbitrary query points: PointConv over the nearest
// interp_k seeds, or inverse-distance weighting of the 3 nearest in the
// ablation.
class SeedInterpolatorImpl : public torch::nn::Module {
 public:
  explicit SeedInterpolatorImpl(const NetConfig& cfg);
  // query [B,M,3] -> [B,M,seed_width]
  Tensor forward(const Tensor& query, const PatchSeeds& seeds);

 private:
  int k_;
  bool idw_;
  PointConv conv{nullptr};
};
TORCH_MODULE(SeedInterpolator);

class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const NetConfig& cfg);
  CompletionPyramid forward(const PatchSeeds& seeds);
  std::vector<UpsampleTransformer>& stages() { return stages_; }

 private:
  std::vector<SeedInterpolator> interps_;
  std::vector<UpsampleTransformer> stages_;
};
TORCH_MODULE(Decoder);

// encode_partial -> style_modulate -> generate_seeds -> decode.
class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const NetConfig& cfg);
  // X_P [B, partial_points, 3], z [B, z_dim]
  Completion forward(const Tensor& X_P, const Tensor& z);

  PartialEncoder encoder{nullptr};
  StyleModulator modulator{nullptr};
  SeedGenerator seed_gen{nullptr};
  Decoder decoder{nullptr};
};
TORCH_MODULE(Generator);

}  // namespace mpc::nets
