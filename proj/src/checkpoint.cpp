#include "mpc/checkpoint.hpp"

#include <fstream>
#include <map>

#include "mpc/container.hpp"
#include "mpc/error.hpp"

namespace mpc::nets {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kParamsFile = "params.mpc";
constexpr const char* kMomentsFile = "moments.mpc";
constexpr const char* kManifestFile = "manifest.json";

std::vector<float> floats_of(const Tensor& t) {
  const Tensor c = t.detach().to(torch::kFloat32).contiguous().view({-1});
  return {c.data_ptr<float>(), c.data_ptr<float>() + c.numel()};
}

Tensor tensor_of(const std::vector<float>& v, std::size_t begin, const Tensor& like) {
  if (begin + static_cast<std::size_t>(like.numel()) > v.size()) throw FormatError(0, "checkpoint payload too short");
  auto t = torch::from_blob(const_cast<float*>(v.data() + begin), {like.numel()}, torch::kFloat32).clone();
  return t.view(like.sizes()).to(like.dtype());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void append_moments(std::vector<container::Record>& recs, json& steps, const std::string& prefix,
                    const ParameterSet& params, torch::optim::Adam* opt) {
  if (!opt) return;
  auto& state = opt->state();
  for (const auto& [name, p] : params.items()) {
    auto it = state.find(p.unsafeGetTensorImpl());
    if (it == state.end()) continue;
    const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
    container::Record r;
    r.id = prefix + name;
    std::vector<float> payload = floats_of(s.exp_avg());
    const auto v = floats_of(s.exp_avg_sq());
    payload.insert(payload.end(), v.begin(), v.end());
    r.factors = std::move(payload);
    recs.push_back(std::move(r));
    steps[prefix + name] = s.step();
  }
}

void restore_moments(const std::map<std::string, const container::Record*>& by_id, const json& steps,
                     const std::string& prefix, const ParameterSet& params, torch::optim::Adam& opt) {
  auto& state = opt.state();
  for (const auto& [name, p] : params.items()) {
    auto it = by_id.find(prefix + name);
    if (it == by_id.end()) continue;
    const auto& f = *it->second->factors;
    auto s = std::make_unique<torch::optim::AdamParamState>();
    s->exp_avg(tensor_of(f, 0, p));
    s->exp_avg_sq(tensor_of(f, static_cast<std::size_t>(p.numel()), p));
    s->step(steps.at(prefix + name).get<std::int64_t>());
    state[p.unsafeGetTensorImpl()] = std::move(s);
  }
}

}  // namespace

void save_checkpoint(const fs::path& dir, const Model& model, torch::optim::Adam* opt_g, torch::optim::Adam* opt_d,
                     const CheckpointState& st) {
  fs::create_directories(dir);
  const ParameterSet params = model.all_params();
  std::vector<container::Record> recs;
  json shapes = json::array();
  for (const auto& [name, t] : params.items()) {
    container::Record r;
    r.id = name;
    r.factors = floats_of(t);
    recs.push_back(std::move(r));
    shapes.push_back({{"name", name}, {"shape", t.sizes().vec()}});
  }
  container::write_file(dir / kParamsFile, recs);

  std::vector<container::Record> moments;
  json steps = json::object();
  append_moments(moments, steps, "g:", model.generator_params(), opt_g);
  append_moments(moments, steps, "d:", model.discriminator_params(), opt_d);
  container::write_file(dir / kMomentsFile, moments);

  json m = {{"format", "mpc-checkpoint"},
            {"step", st.step},
            {"epoch", st.epoch},
            {"seed", st.seed},
            {"params_file", kParamsFile},
            {"moments_file", kMomentsFile},
            {"moment_steps", steps},
            {"parameters", shapes},
            {"params_hash", container::file_hash(dir / kParamsFile)},
            {"config", st.config},
            {"net", model.config()}};
  for (const auto& [k, v] : st.extra.items()) m[k] = v;
  write_json(dir / kManifestFile, m);
}

json read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  std::ifstream in(path);
  if (!in) throw IoError("no checkpoint manifest at " + path.string());
  try {
    json j;
    in >> j;
    if (j.value("format", "") != "mpc-checkpoint") throw IoError(path.string() + " is not a checkpoint manifest");
    return j;
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest " + path.string() + ": " + e.what());
  }
}

CheckpointState read_checkpoint_state(const fs::path& dir) {
  const json m = read_manifest(dir);
  CheckpointState st;
  st.step = m.at("step").get<std::int64_t>();
  st.epoch = m.at("epoch").get<int>();
  st.seed = m.at("seed").get<std::uint64_t>();
  st.config = m.value("config", json::object());
  return st;
}

void load_parameters(const fs::path& dir, const Model& model) {
  const auto recs = container::read_file(dir / kParamsFile);
  std::map<std::string, const container::Record*> by_id;
  for (const auto& r : recs) by_id[r.id] = &r;
  torch::NoGradGuard guard;
  const ParameterSet params = model.all_params();
  for (const auto& [name, p] : params.items()) {
    auto it = by_id.find(name);
    if (it == by_id.end() || !it->second->factors) throw IoError("checkpoint lacks parameter " + name);
    if (it->second->factors->size() != static_cast<std::size_t>(p.numel())) {
      throw IoError("checkpoint parameter " + name + " has the wrong size");
    }
    p.copy_(tensor_of(*it->second->factors, 0, p));
  }
}

void load_moments(const fs::path& dir, const Model& model, torch::optim::Adam& opt_g, torch::optim::Adam& opt_d) {
  const json m = read_manifest(dir);
  const auto recs = container::read_file(dir / m.value("moments_file", std::string(kMomentsFile)));
  std::map<std::string, const container::Record*> by_id;
  for (const auto& r : recs) by_id[r.id] = &r;
  const json steps = m.value("moment_steps", json::object());
  restore_moments(by_id, steps, "g:", model.generator_params(), opt_g);
  restore_moments(by_id, steps, "d:", model.discriminator_params(), opt_d);
}

std::unique_ptr<Model> load_model(const fs::path& dir, torch::Dtype dtype) {
  const json m = read_manifest(dir);
  const NetConfig cfg = m.at("net").get<NetConfig>();
  auto model = std::make_unique<Model>(cfg, 0, dtype);
  load_parameters(dir, *model);
  return model;
}

std::string checkpoint_hash(const fs::path& dir) { return container::file_hash(dir / kParamsFile); }

}  // namespace mpc::nets
