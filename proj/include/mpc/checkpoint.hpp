#pragma once

// Checkpoint directory layout:
//   params.mpc     container, one record per parameter (id = name, no
//                  points, float32 values as the factor payload)
//   moments.mpc    container, one record per optimiser state ("g:" / "d:"
//                  + name, factors = exp_avg then exp_avg_sq)
//   manifest.json  {format, step, epoch, seed, moments_file, params_file,
//                   parameters: [{name, shape}], moment_steps, config, ...}

#include <torch/torch.h>

#include <filesystem>
#include <memory>

#include "json.hpp"
#include "mpc/model.hpp"

namespace mpc::nets {

struct CheckpointState {
  std::int64_t step = 0;
  int epoch = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;  // training config, includes "net"
  nlohmann::json extra = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& dir, const Model& model, torch::optim::Adam* opt_g,
                     torch::optim::Adam* opt_d, const CheckpointState& state);

nlohmann::json read_manifest(const std::filesystem::path& dir);
CheckpointState read_checkpoint_state(const std::filesystem::path& dir);

// Overwrites the model's parameters; names and shapes must match.
void load_parameters(const std::filesystem::path& dir, const Model& model);
void load_moments(const std::filesystem::path& dir, const Model& model, torch::optim::Adam& opt_g,
                  torch::optim::Adam& opt_d);

// Builds a model from the manifest's network config and loads parameters.
std::unique_ptr<Model> load_model(const std::filesystem::path& dir, torch::Dtype dtype = torch::kFloat32);

// FNV hash of the parameter file; identifies a checkpoint in reports.
std::string checkpoint_hash(const std::filesystem::path& dir);

}  // namespace mpc::nets
