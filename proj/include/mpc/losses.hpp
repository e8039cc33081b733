#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mpc/discriminator.hpp"
#include "mpc/style.hpp"
#include "mpc/tensor.hpp"

namespace mpc::nets {

inline constexpr double kDivClamp = 1e-6;

// Per-level critic: level, clouds [B,N,3] -> scores [B].
using Critic = std::function<Tensor(int, const Tensor&)>;

Critic bank_critic(DiscriminatorBank bank);

struct Lambdas {
  double g = 1.0;
  double comp = 0.5;
  double part = 1.0;
  double div = 5.0;
  double kl = 1e-2;
  // Throws ConfigError on a negative weight.
  void validate() const;
};

// Mean over `levels` of E D(fake) - E D(real) + gamma/2 E |grad_X D(real)|^2.
// reals[i] / fakes[i] are the level-i batches; only the listed levels count.
Tensor d_loss(const std::vector<Tensor>& reals, const std::vector<Tensor>& fakes, const Critic& critic,
              double gamma, const std::vector<int>& levels);
// -mean over levels of E D(fake).
Tensor g_adv_loss(const std::vector<Tensor>& fakes, const Critic& critic, const std::vector<int>& levels);

// The multi-scale terms optionally report per-level values: the term itself
// for comp and part (part summed over branches), the mean distance for the
// diversity terms.

// Sum over levels of the batch-mean chamfer(GT_i, G_i).
Tensor comp_loss(const std::vector<Tensor>& pyramid, const std::vector<Tensor>& gt_levels,
                 std::vector<double>* per_level = nullptr);
// Sum over branches and levels of the batch-mean uhd(X_P, G_i).
Tensor part_loss(const std::vector<std::vector<Tensor>>& pyramids, const Tensor& X_P,
                 std::vector<double>* per_level = nullptr);
// Sum over levels of the batch-mean 1 / max(|f1_i - f2_i|_1, clamp).
Tensor div_loss(const std::vector<Tensor>& f1, const std::vector<Tensor>& f2, double clamp = kDivClamp,
                std::vector<double>* per_level = nullptr);
// Sum over levels of the batch-mean 1 / max(emd(G1_i, G2_i), clamp).
Tensor emd_div_loss(const std::vector<Tensor>& pyr1, const std::vector<Tensor>& pyr2, double clamp = kDivClamp,
                    std::vector<double>* per_level = nullptr);
// Batch-mean KL to N(0, I).
Tensor kl_loss(const StyleDistribution& dist);

struct LossBreakdown {
  Tensor g_adv, comp, part, div, kl, total;
  double d_loss = 0.0;
  std::map<std::string, std::vector<double>> per_level;
};

// total = l.g g_adv + l.comp comp + l.part part + l.div div + l.kl kl.
// Undefined components count as zero.
LossBreakdown total_generator_loss(const Tensor& g_adv, const Tensor& comp, const Tensor& part, const Tensor& div,
                                   const Tensor& kl, const Lambdas& l);

}  // namespace mpc::nets
