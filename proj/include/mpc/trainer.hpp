#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpc/data.hpp"
#include "mpc/losses.hpp"
#include "mpc/model.hpp"
#include "mpc/net_config.hpp"

namespace mpc::nets {

struct TrainConfig {
  int epochs = 300;
  int batch_size = 56;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double decay_rate = 0.98;
  int decay_every_epochs = 2;
  double beta1 = 0.0;
  double beta2 = 0.99;
  int d_steps = 1;  // discriminator updates per generator update
  Lambdas lambdas;
  double gamma = 1.0;
  double style_noise_scale = 0.1;
  double eps_mask = 0.05;
  std::uint64_t seed = 0;
  std::string complete_path;
  std::string partial_path;
  int checkpoint_every = 10;  // epochs
  std::int64_t max_steps = 0;  // 0: run all epochs
  int validation_partials = 0;  // > 0: pick a best checkpoint on this many test partials
  int validation_k = 5;
  bool float64 = false;

  // ablations
  bool disable_comp = false;
  bool disable_part = false;
  bool disable_div = false;
  bool emd_div = false;
  bool mapping_network_style = false;
  bool single_scale_disc = false;
  bool idw_seed_interp = false;

  NetConfig net;

  // Lambdas with disabled terms zeroed.
  Lambdas effective_lambdas() const;
  NetConfig effective_net() const;
  std::vector<int> disc_levels() const;
  double lr_g_at(int epoch) const;
  torch::Dtype dtype() const { return float64 ? torch::kFloat64 : torch::kFloat32; }
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
// Reads a JSON config; relative dataset paths resolve against the config's
// directory. MPC_SEED in the environment overrides "seed".
TrainConfig load_train_config(const std::filesystem::path& path);
void apply_env_overrides(TrainConfig& c);
// Applies "--ablate" names: comp, part, div, emd_div, mapping, single_scale, idw.
void apply_ablation(TrainConfig& c, const std::string& name);

// Complete shapes and partials of one split, with source lookup.
struct TrainData {
  std::vector<data::ShapeRecord> completes;
  std::vector<data::PartialRecord> partials;
  std::vector<std::size_t> source;  // partials[i] comes from completes[source[i]]
};

enum class Split { train, test, all };
TrainData load_data(const std::filesystem::path& complete_path, const std::filesystem::path& partial_path, Split split);
TrainData make_data(std::vector<data::ShapeRecord> completes, std::vector<data::PartialRecord> partials, Split split);

// Resamples every cloud whose size differs from the network's partial or
// complete resolution (seeded by record id); part labels follow their points.
TrainData match_resolution(TrainData data, const NetConfig& net);

struct Batch {
  Tensor X_P;   // [B, partial_points, 3]
  Tensor X_GT;  // [B, complete_points, 3]
  Tensor X_2;   // [B, complete_points, 3]
};

// Partials `rows` with their ground truth and an independent complete shape
// per sample drawn with `seed`.
Batch assemble_batch(const TrainData& data, const std::vector<std::size_t>& rows, std::uint64_t seed,
                     torch::Dtype dtype);

struct Optimizers {
  torch::optim::Adam g;
  torch::optim::Adam d;
};
Optimizers make_optimizers(const Model& model, const TrainConfig& cfg);

struct StepResult {
  double d_loss = 0.0;
  double g_adv = 0.0, comp = 0.0, part = 0.0, div = 0.0, kl = 0.0, total = 0.0;
  std::map<std::string, std::vector<double>> per_level;
  nlohmann::json to_json() const;
};

// One discriminator update then one generator + style encoder update.
// Deterministic given (model, optimiser state, batch, step_seed).
StepResult train_step(Model& model, Optimizers& opt, const Batch& batch, const TrainConfig& cfg,
                      std::uint64_t step_seed);

struct FitResult {
  std::filesystem::path last_checkpoint;
  std::optional<std::filesystem::path> best_checkpoint;
  std::int64_t steps = 0;
  int epochs = 0;
};

using ProgressFn = std::function<void(std::int64_t step, int epoch, const StepResult&)>;

// Epoch loop with checkpoints under out/ckpt-<step>, a JSON-lines log at
// out/train.log.jsonl, and out/last.json / out/best.json pointers. Resumes
// from `resume` when given.
FitResult fit(const TrainConfig& cfg, const std::filesystem::path& out,
              const std::optional<std::filesystem::path>& resume = std::nullopt, const ProgressFn& progress = {});
FitResult fit(const TrainConfig& cfg, const TrainData& train, const TrainData* validation,
              const std::filesystem::path& out, const std::optional<std::filesystem::path>& resume = std::nullopt,
              const ProgressFn& progress = {});

}  // namespace mpc::nets
