#include "mpc/losses.hpp"

#include "mpc/error.hpp"

namespace mpc::nets {

namespace {

void check_levels(const std::vector<Tensor>& a, const std::vector<Tensor>& b, const char* what) {
  if (a.size() != b.size()) throw SizeError(std::string(what) + ": level count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size(1) != b[i].size(1)) {
      throw SizeError(std::string(what) + ": resolution mismatch at level " + std::to_string(i));
    }
  }
}

Tensor zero_like_any(const std::vector<Tensor>& ts) { return torch::zeros({}, ts.front().options()); }

}  // namespace

Critic bank_critic(DiscriminatorBank bank) {
  return [bank](int level, const Tensor& X) mutable { return bank->forward(level, X).score; };
}

void Lambdas::validate() const {
  for (double v : {g, comp, part, div, kl}) {
    if (v < 0) throw ConfigError("loss weights must be non-negative");
  }
}

Tensor d_loss(const std::vector<Tensor>& reals, const std::vector<Tensor>& fakes, const Critic& critic,
              double gamma, const std::vector<int>& levels) {
  if (levels.empty()) throw ConfigError("d_loss: no levels");
  Tensor total = torch::zeros({}, reals.at(static_cast<std::size_t>(levels.front())).options());
  for (int i : levels) {
    const auto& real_in = reals.at(static_cast<std::size_t>(i));
    const auto& fake = fakes.at(static_cast<std::size_t>(i));
    if (real_in.dim() != 3 || fake.dim() != 3 || real_in.size(1) != fake.size(1)) {
      throw SizeError("d_loss: level " + std::to_string(i) + " real and fake resolutions differ");
    }
    Tensor real = real_in.detach().requires_grad_(gamma > 0);
    const Tensor real_score = critic(i, real);
    Tensor term = critic(i, fake).mean() - real_score.mean();
    if (gamma > 0) {
      const Tensor g = torch::autograd::grad({real_score.sum()}, {real}, {}, true, true, true)[0];
      if (g.defined()) term = term + 0.5 * gamma * g.pow(2).sum({1, 2}).mean();
    }
    total = total + term;
  }
  return total / static_cast<double>(levels.size());
}

Tensor g_adv_loss(const std::vector<Tensor>& fakes, const Critic& critic, const std::vector<int>& levels) {
  if (levels.empty()) throw ConfigError("g_adv_loss: no levels");
  Tensor total = torch::zeros({}, fakes.at(static_cast<std::size_t>(levels.front())).options());
  for (int i : levels) total = total + critic(i, fakes.at(static_cast<std::size_t>(i))).mean();
  return -total / static_cast<double>(levels.size());
}

namespace {

void record(std::vector<double>* out, std::size_t i, const Tensor& v) {
  if (!out) return;
  if (out->size() <= i) out->resize(i + 1, 0.0);
  (*out)[i] += v.item<double>();
}

}  // namespace

Tensor comp_loss(const std::vector<Tensor>& pyramid, const std::vector<Tensor>& gt_levels,
                 std::vector<double>* per_level) {
  check_levels(pyramid, gt_levels, "comp_loss");
  Tensor total = zero_like_any(pyramid);
  for (std::size_t i = 0; i < pyramid.size(); ++i) {
    const Tensor term = chamfer(gt_levels[i], pyramid[i]).mean();
    record(per_level, i, term);
    total = total + term;
  }
  return total;
}

Tensor part_loss(const std::vector<std::vector<Tensor>>& pyramids, const Tensor& X_P,
                 std::vector<double>* per_level) {
  Tensor total = torch::zeros({}, X_P.options());
  for (const auto& pyr : pyramids) {
    for (std::size_t i = 0; i < pyr.size(); ++i) {
      const Tensor term = uhd(X_P, pyr[i]).mean();
      record(per_level, i, term);
      total = total + term;
    }
  }
  return total;
}

Tensor div_loss(const std::vector<Tensor>& f1, const std::vector<Tensor>& f2, double clamp,
                std::vector<double>* per_level) {
  check_levels(f1, f2, "div_loss");
  Tensor total = zero_like_any(f1);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    const Tensor l1 = (f1[i] - f2[i]).abs().sum(-1);
    record(per_level, i, l1.mean());
    total = total + (1.0 / l1.clamp_min(clamp)).mean();
  }
  return total;
}

Tensor emd_div_loss(const std::vector<Tensor>& pyr1, const std::vector<Tensor>& pyr2, double clamp,
                    std::vector<double>* per_level) {
  check_levels(pyr1, pyr2, "emd_div_loss");
  Tensor total = zero_like_any(pyr1);
  for (std::size_t i = 0; i < pyr1.size(); ++i) {
    const Tensor d = emd(pyr1[i], pyr2[i]);
    record(per_level, i, d.mean());
    total = total + (1.0 / d.clamp_min(clamp)).mean();
  }
  return total;
}

Tensor kl_loss(const StyleDistribution& dist) { return kl_to_standard_normal(dist).mean(); }

LossBreakdown total_generator_loss(const Tensor& g_adv, const Tensor& comp, const Tensor& part, const Tensor& div,
                                   const Tensor& kl, const Lambdas& l) {
  l.validate();
  LossBreakdown b;
  Tensor ref;
  for (const Tensor* t : {&g_adv, &comp, &part, &div, &kl}) {
    if (t->defined()) {
      ref = *t;
      break;
    }
  }
  const auto opts = ref.defined() ? ref.options() : torch::TensorOptions().dtype(torch::kFloat64);
  auto or_zero = [&](const Tensor& t) { return t.defined() ? t : torch::zeros({}, opts); };
  b.g_adv = or_zero(g_adv);
  b.comp = or_zero(comp);
  b.part = or_zero(part);
  b.div = or_zero(div);
  b.kl = or_zero(kl);
  b.total = l.g * b.g_adv + l.comp * b.comp + l.part * b.part + l.div * b.div + l.kl * b.kl;
  return b;
}

}  // namespace mpc::nets
