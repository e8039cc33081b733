#pragma once

#include "mpc/discriminator.hpp"
#include "mpc/generator.hpp"
#include "mpc/net_config.hpp"
#include "mpc/style.hpp"
#include "mpc/tensor.hpp"

namespace mpc::nets {

// Every network of the completion GAN with one dtype and a deterministic
// initialisation. Parameter names are prefixed gen., style., mapping.,
// disc.
class Model {
 public:
  Model(const NetConfig& cfg, std::uint64_t init_seed, torch::Dtype dtype = torch::kFloat32);

  const NetConfig& config() const { return cfg_; }
  torch::Dtype dtype() const { return dtype_; }

  // Generator, style encoder and (under the ablation) mapping network.
  ParameterSet generator_params() const;
  ParameterSet discriminator_params() const;
  ParameterSet all_params() const;

  // Inference style codes: z ~ N(0, I), or mapping(N(0, I)) under the
  // mapping-network ablation. [count, z_dim]
  Tensor inference_styles(std::int64_t count, std::uint64_t seed);

  Completion complete(const Tensor& X_P, const Tensor& z) { return gen->forward(X_P, z); }

  void train(bool on = true);

  Generator gen{nullptr};
  StyleEncoder style{nullptr};
  MappingNetwork mapping{nullptr};
  DiscriminatorBank disc{nullptr};

 private:
  NetConfig cfg_;
  torch::Dtype dtype_;
};

}  // namespace mpc::nets
