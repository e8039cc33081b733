#include "mpc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>

#include "mpc/checkpoint.hpp"
#include "mpc/container.hpp"
#include "mpc/error.hpp"
#include "mpc/evaluation.hpp"
#include "mpc/rng.hpp"

namespace mpc::nets {

namespace fs = std::filesystem;
using nlohmann::json;

Lambdas TrainConfig::effective_lambdas() const {
  Lambdas l = lambdas;
  if (disable_comp) l.comp = 0;
  if (disable_part) l.part = 0;
  if (disable_div) l.div = 0;
  if (mapping_network_style) l.kl = 0;
  return l;
}

NetConfig TrainConfig::effective_net() const {
  NetConfig n = net;
  if (mapping_network_style) n.mapping_style = true;
  if (idw_seed_interp) n.idw_interp = true;
  return n;
}

std::vector<int> TrainConfig::disc_levels() const {
  const int levels = effective_net().levels();
  if (single_scale_disc) return {levels - 1};
  std::vector<int> out(static_cast<std::size_t>(levels));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

double TrainConfig::lr_g_at(int epoch) const {
  return lr_g * std::pow(decay_rate, static_cast<double>(epoch / std::max(1, decay_every_epochs)));
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (epochs < 1) fail("epochs must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (!(lr_g > 0) || !(lr_d > 0)) fail("learning rates must be positive");
  if (!(decay_rate > 0) || decay_every_epochs < 1) fail("decay_rate and decay_every_epochs must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) fail("Adam betas must lie in [0, 1)");
  if (d_steps < 1) fail("d_steps must be positive");
  if (gamma < 0) fail("gamma must be non-negative");
  if (style_noise_scale < 0) fail("style_noise_scale must be non-negative");
  if (!(eps_mask > 0)) fail("eps_mask must be positive");
  if (checkpoint_every < 1) fail("checkpoint_every must be positive");
  if (max_steps < 0) fail("max_steps must be non-negative");
  lambdas.validate();
  effective_net().validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"lr_g", c.lr_g},
       {"lr_d", c.lr_d},
       {"decay_rate", c.decay_rate},
       {"decay_every_epochs", c.decay_every_epochs},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"d_steps", c.d_steps},
       {"lambda",
        {{"g", c.lambdas.g}, {"comp", c.lambdas.comp}, {"part", c.lambdas.part}, {"div", c.lambdas.div},
         {"kl", c.lambdas.kl}}},
       {"gamma", c.gamma},
       {"style_noise_scale", c.style_noise_scale},
       {"eps_mask", c.eps_mask},
       {"seed", c.seed},
       {"complete_path", c.complete_path},
       {"partial_path", c.partial_path},
       {"checkpoint_every", c.checkpoint_every},
       {"max_steps", c.max_steps},
       {"validation_partials", c.validation_partials},
       {"validation_k", c.validation_k},
       {"precision", c.float64 ? "float64" : "float32"},
       {"ablation",
        {{"disable_comp", c.disable_comp},
         {"disable_part", c.disable_part},
         {"disable_div", c.disable_div},
         {"emd_div", c.emd_div},
         {"mapping_network_style", c.mapping_network_style},
         {"single_scale_disc", c.single_scale_disc},
         {"idw_seed_interp", c.idw_seed_interp}}},
       {"net", c.net}};
}

void from_json(const json& j, TrainConfig& c) {
  c = TrainConfig{};
  auto get = [&](const json& src, const char* key, auto& field) {
    if (src.contains(key)) src.at(key).get_to(field);
  };
  get(j, "epochs", c.epochs);
  get(j, "batch_size", c.batch_size);
  get(j, "lr_g", c.lr_g);
  get(j, "lr_d", c.lr_d);
  get(j, "decay_rate", c.decay_rate);
  get(j, "decay_every_epochs", c.decay_every_epochs);
  get(j, "beta1", c.beta1);
  get(j, "beta2", c.beta2);
  get(j, "d_steps", c.d_steps);
  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    get(l, "g", c.lambdas.g);
    get(l, "comp", c.lambdas.comp);
    get(l, "part", c.lambdas.part);
    get(l, "div", c.lambdas.div);
    get(l, "kl", c.lambdas.kl);
  }
  get(j, "gamma", c.gamma);
  get(j, "style_noise_scale", c.style_noise_scale);
  get(j, "eps_mask", c.eps_mask);
  get(j, "seed", c.seed);
  get(j, "complete_path", c.complete_path);
  get(j, "partial_path", c.partial_path);
  get(j, "checkpoint_every", c.checkpoint_every);
  get(j, "max_steps", c.max_steps);
  get(j, "validation_partials", c.validation_partials);
  get(j, "validation_k", c.validation_k);
  if (j.contains("precision")) {
    const auto p = j.at("precision").get<std::string>();
    if (p != "float32" && p != "float64") throw ConfigError("precision must be float32 or float64");
    c.float64 = p == "float64";
  }
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    get(a, "disable_comp", c.disable_comp);
    get(a, "disable_part", c.disable_part);
    get(a, "disable_div", c.disable_div);
    get(a, "emd_div", c.emd_div);
    get(a, "mapping_network_style", c.mapping_network_style);
    get(a, "single_scale_disc", c.single_scale_disc);
    get(a, "idw_seed_interp", c.idw_seed_interp);
  }
  if (j.contains("net")) c.net = j.at("net").get<NetConfig>();
}

void apply_env_overrides(TrainConfig& c) {
  if (const char* s = std::getenv("MPC_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("MPC_SEED is not an unsigned integer: ") + s);
    c.seed = v;
  }
}

TrainConfig load_train_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  TrainConfig c;
  try {
    json j;
    in >> j;
    c = j.get<TrainConfig>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  // dataset paths are relative to the config file
  const fs::path base = path.parent_path();
  for (std::string* p : {&c.complete_path, &c.partial_path}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  apply_env_overrides(c);
  return c;
}

void apply_ablation(TrainConfig& c, const std::string& name) {
  if (name == "comp") {
    c.disable_comp = true;
  } else if (name == "part") {
    c.disable_part = true;
  } else if (name == "div") {
    c.disable_div = true;
  } else if (name == "emd_div") {
    c.emd_div = true;
  } else if (name == "mapping") {
    c.mapping_network_style = true;
  } else if (name == "single_scale") {
    c.single_scale_disc = true;
  } else if (name == "idw") {
    c.idw_seed_interp = true;
  } else {
    throw ConfigError("unknown ablation '" + name + "' (comp, part, div, emd_div, mapping, single_scale, idw)");
  }
}

TrainData make_data(std::vector<data::ShapeRecord> completes, std::vector<data::PartialRecord> partials,
                    Split split) {
  auto keep = [split](const std::string& id) {
    return split == Split::all || data::is_test_split(id) == (split == Split::test);
  };
  TrainData d;
  std::map<std::string, std::size_t> index;
  for (auto& s : completes) {
    if (!keep(s.id)) continue;
    index[s.id] = d.completes.size();
    d.completes.push_back(std::move(s));
  }
  for (auto& p : partials) {
    auto it = index.find(p.source_id);
    if (it == index.end()) {
      if (keep(p.source_id)) throw IoError("partial " + p.id + " refers to missing shape " + p.source_id);
      continue;
    }
    d.source.push_back(it->second);
    d.partials.push_back(std::move(p));
  }
  return d;
}

namespace {

std::uint64_t id_seed(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TrainData match_resolution(TrainData data, const NetConfig& net) {
  const auto np = static_cast<std::size_t>(net.partial_points);
  const auto nc = static_cast<std::size_t>(net.complete_points);
  for (auto& s : data.completes) {
    if (s.complete.size() == nc) continue;
    const auto idx = data::resample_indices(s.complete.size(), nc, derive_seed(id_seed(s.id), {0x4e5}));
    s.complete = s.complete.select(idx);
    if (!s.part_labels.empty()) {
      std::vector<std::uint16_t> labels;
      for (std::size_t i : idx) labels.push_back(s.part_labels[i]);
      s.part_labels = std::move(labels);
    }
  }
  for (auto& p : data.partials) {
    if (p.partial.size() != np) p.partial = data::resample(p.partial, np, derive_seed(id_seed(p.id), {0x4e6}));
  }
  return data;
}

TrainData load_data(const fs::path& complete_path, const fs::path& partial_path, Split split) {
  if (!fs::exists(complete_path)) throw ConfigError("dataset not found: " + complete_path.string());
  if (!fs::exists(partial_path)) throw ConfigError("dataset not found: " + partial_path.string());
  return make_data(container::read_dataset(complete_path), container::read_partials(partial_path), split);
}

Batch assemble_batch(const TrainData& data, const std::vector<std::size_t>& rows, std::uint64_t seed,
                     torch::Dtype dtype) {
  if (rows.empty()) throw SizeError("assemble_batch: empty batch");
  Rng rng(seed);
  std::vector<geometry::PointCloud> xp, gt, x2;
  for (std::size_t r : rows) {
    xp.push_back(data.partials.at(r).partial);
    gt.push_back(data.completes.at(data.source.at(r)).complete);
    x2.push_back(data.completes.at(static_cast<std::size_t>(rng.below(data.completes.size()))).complete);
  }
  return {batch_points(xp, dtype), batch_points(gt, dtype), batch_points(x2, dtype)};
}

Optimizers make_optimizers(const Model& model, const TrainConfig& cfg) {
  auto opts = [&](double lr) { return torch::optim::AdamOptions(lr).betas({cfg.beta1, cfg.beta2}).eps(1e-8); };
  return {torch::optim::Adam(model.generator_params().tensors(), opts(cfg.lr_g)),
          torch::optim::Adam(model.discriminator_params().tensors(), opts(cfg.lr_d))};
}

json StepResult::to_json() const {
  return {{"d_loss", d_loss}, {"g_adv", g_adv}, {"comp", comp},       {"part", part},
          {"div", div},       {"kl", kl},       {"total", total},     {"per_level", per_level}};
}

namespace {

void set_requires_grad(const ParameterSet& p, bool on) {
  for (const auto& [name, t] : p.items()) t.requires_grad_(on);
}

Tensor gt_level(const Tensor& X_GT, int points, std::uint64_t seed) {
  if (points == X_GT.size(1)) return X_GT;
  std::vector<Tensor> rows;
  for (std::int64_t b = 0; b < X_GT.size(0); ++b) {
    const auto idx = data::resample_indices(static_cast<std::size_t>(X_GT.size(1)), static_cast<std::size_t>(points),
                                            derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    std::vector<std::int64_t> i64(idx.begin(), idx.end());
    rows.push_back(X_GT[b].index_select(0, torch::tensor(i64, torch::kInt64)));
  }
  return torch::stack(rows);
}

double scalar(const Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

void check_finite(double v, const char* what, std::uint64_t step_seed) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + what + " (step seed " + std::to_string(step_seed) + ")");
  }
}

}  // namespace

StepResult train_step(Model& model, Optimizers& opt, const Batch& batch, const TrainConfig& cfg,
                      std::uint64_t step_seed) {
  const NetConfig& net = model.config();
  const Lambdas lambdas = cfg.effective_lambdas();
  const std::vector<int> levels = cfg.disc_levels();
  const std::int64_t B = batch.X_P.size(0);
  const ParameterSet dparams = model.discriminator_params();

  // (1) style codes
  StyleDistribution dist1, dist2;
  Tensor z1, z2;
  if (model.mapping) {
    z1 = model.mapping->forward(normal_tensor({B, net.z_dim}, derive_seed(step_seed, {1}), model.dtype()));
    z2 = model.mapping->forward(normal_tensor({B, net.z_dim}, derive_seed(step_seed, {2}), model.dtype()));
  } else {
    dist1 = model.style->forward(batch.X_GT);
    dist2 = model.style->forward(batch.X_2);
    z1 = sample_style(dist1, derive_seed(step_seed, {1}));
    z2 = sample_style(dist2, derive_seed(step_seed, {2}));
  }
  z1 = perturb_style(z1, cfg.style_noise_scale, derive_seed(step_seed, {3}));
  z2 = perturb_style(z2, cfg.style_noise_scale, derive_seed(step_seed, {4}));

  // (2) two generator forwards
  const Completion c1 = model.complete(batch.X_P, z1);
  const Completion c2 = model.complete(batch.X_P, z2);
  const auto& pyr1 = c1.pyramid.points;
  const auto& pyr2 = c2.pyramid.points;

  std::vector<Tensor> gt;
  for (int i = 0; i < net.levels(); ++i) gt.push_back(gt_level(batch.X_GT, net.level_points(i), derive_seed(step_seed, {10, static_cast<std::uint64_t>(i)})));

  StepResult res;
  // (3) discriminator update
  std::vector<Tensor> fakes_detached;
  for (int i = 0; i < net.levels(); ++i) fakes_detached.push_back(torch::cat({pyr1[i], pyr2[i]}).detach());
  for (int s = 0; s < cfg.d_steps; ++s) {
    opt.d.zero_grad();
    const Tensor dl = d_loss(gt, fakes_detached, bank_critic(model.disc), cfg.gamma, levels);
    res.d_loss = dl.item<double>();
    check_finite(res.d_loss, "discriminator loss", step_seed);
    dl.backward();
    opt.d.step();
  }

  // (4) generator + style encoder update
  set_requires_grad(dparams, false);
  opt.g.zero_grad();
  Tensor g_adv = torch::zeros({}, batch.X_P.options());
  std::vector<Tensor> f1, f2;
  std::vector<double> adv_levels;
  const Tensor xp2 = torch::cat({batch.X_P, batch.X_P});
  for (int i : levels) {
    const Tensor fake = torch::cat({pyr1[i], pyr2[i]});
    const DiscriminatorOutput out = model.disc->forward(i, fake);
    const Tensor term = -out.score.mean();
    adv_levels.push_back(term.item<double>());
    g_adv = g_adv + term;
    if (lambdas.div > 0 && !cfg.emd_div) {
      const Tensor pooled = masked_mix_pool(out, fake, xp2, cfg.eps_mask).f_mix;
      f1.push_back(pooled.narrow(0, 0, B));
      f2.push_back(pooled.narrow(0, B, B));
    }
  }
  g_adv = g_adv / static_cast<double>(levels.size());
  res.per_level["g_adv"] = adv_levels;

  Tensor comp, part, div, kl;
  if (lambdas.comp > 0) comp = comp_loss(pyr1, gt, &res.per_level["comp"]);
  if (lambdas.part > 0) part = part_loss({pyr1, pyr2}, batch.X_P, &res.per_level["part"]);
  if (lambdas.div > 0) {
    if (cfg.emd_div) {
      div = emd_div_loss(pyr1, pyr2, kDivClamp, &res.per_level["div_emd"]);
    } else {
      div = div_loss(f1, f2, kDivClamp, &res.per_level["div_l1"]);
    }
  }
  if (!model.mapping && lambdas.kl > 0) kl = 0.5 * (kl_loss(dist1) + kl_loss(dist2));
  const LossBreakdown lb = total_generator_loss(g_adv, comp, part, div, kl, lambdas);
  res.g_adv = scalar(lb.g_adv);
  res.comp = scalar(lb.comp);
  res.part = scalar(lb.part);
  res.div = scalar(lb.div);
  res.kl = scalar(lb.kl);
  res.total = scalar(lb.total);
  check_finite(res.total, "generator loss", step_seed);
  lb.total.backward();
  opt.g.step();
  set_requires_grad(dparams, true);
  return res;
}

namespace {

void write_pointer(const fs::path& path, const fs::path& ckpt, const json& extra = json::object()) {
  json j = {{"checkpoint", ckpt.filename().string()}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string step_name(std::int64_t step) {
  std::string s = std::to_string(step);
  return "ckpt-" + std::string(s.size() < 8 ? 8 - s.size() : 0, '0') + s;
}

void set_lr(torch::optim::Adam& opt, double lr) {
  for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);
}

}  // namespace

FitResult fit(const TrainConfig& cfg, const TrainData& train, const TrainData* validation, const fs::path& out,
              const std::optional<fs::path>& resume, const ProgressFn& progress) {
  cfg.validate();
  if (train.partials.empty()) throw ConfigError("training split has no partial shapes");
  fs::create_directories(out);
  Model model(cfg.effective_net(), derive_seed(cfg.seed, {0x1417}), cfg.dtype());
  model.train(true);
  Optimizers opt = make_optimizers(model, cfg);

  const std::int64_t n = static_cast<std::int64_t>(train.partials.size());
  const std::int64_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::int64_t step = 0;
  int start_epoch = 0;
  json best_meta;
  double best_score = std::numeric_limits<double>::infinity();
  if (resume) {
    const CheckpointState st = read_checkpoint_state(*resume);
    load_parameters(*resume, model);
    load_moments(*resume, model, opt.g, opt.d);
    step = st.step;
    start_epoch = static_cast<int>(step / steps_per_epoch);
    if (fs::exists(out / "best.json")) {
      std::ifstream in(out / "best.json");
      in >> best_meta;
      best_score = best_meta.value("score", best_score);
    }
  }

  std::ofstream log(out / "train.log.jsonl", resume ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + (out / "train.log.jsonl").string());

  FitResult result;
  auto save = [&](int epoch_done) {
    const fs::path dir = out / step_name(step);
    CheckpointState st;
    st.step = step;
    st.epoch = epoch_done;
    st.seed = cfg.seed;
    st.config = cfg;
    st.extra = {{"lr_g", cfg.lr_g_at(epoch_done)}, {"lr_d", cfg.lr_d}};
    save_checkpoint(dir, model, &opt.g, &opt.d, st);
    write_pointer(out / "last.json", dir, {{"step", step}});
    result.last_checkpoint = dir;
    if (validation && cfg.validation_partials > 0 && !validation->partials.empty()) {
      std::vector<data::PartialRecord> vp(
          validation->partials.begin(),
          validation->partials.begin() +
              std::min<std::ptrdiff_t>(cfg.validation_partials, static_cast<std::ptrdiff_t>(validation->partials.size())));
      std::vector<geometry::PointCloud> test;
      for (const auto& s : validation->completes) test.push_back(s.complete);
      model.train(false);
      EvalOptions eo;
      eo.K = cfg.validation_k;
      eo.seed = derive_seed(cfg.seed, {0x7a1});
      const MetricsReport rep = evaluate(model, vp, test, eo);
      model.train(true);
      // Lower MMD and higher TMD both count as better.
      const double score = rep.mmd / std::max(rep.tmd, 1e-12);
      if (score < best_score) {
        best_score = score;
        write_pointer(out / "best.json", dir, {{"step", step}, {"score", score}, {"mmd", rep.mmd}, {"tmd", rep.tmd}});
        result.best_checkpoint = dir;
      }
    }
  };

  bool stop = false;
  for (int epoch = start_epoch; epoch < cfg.epochs && !stop; ++epoch) {
    set_lr(opt.g, cfg.lr_g_at(epoch));
    set_lr(opt.d, cfg.lr_d);
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, {0xe90c, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);
    for (std::int64_t s = step - static_cast<std::int64_t>(epoch) * steps_per_epoch; s < steps_per_epoch; ++s) {
      const auto begin = static_cast<std::size_t>(s * cfg.batch_size);
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto t0 = std::chrono::steady_clock::now();
      const std::uint64_t step_seed = derive_seed(cfg.seed, {0x57e9, static_cast<std::uint64_t>(step)});
      const Batch batch = assemble_batch(train, rows, derive_seed(step_seed, {0xba7c}), cfg.dtype());
      const StepResult r = train_step(model, opt, batch, cfg, step_seed);
      ++step;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json line = r.to_json();
      line["step"] = step;
      line["epoch"] = epoch;
      line["lr_g"] = cfg.lr_g_at(epoch);
      line["lr_d"] = cfg.lr_d;
      line["seconds"] = secs;
      log << line.dump() << '\n';
      log.flush();
      if (progress) progress(step, epoch, r);
      if (cfg.max_steps > 0 && step >= cfg.max_steps) {
        stop = true;
        break;
      }
    }
    const bool epoch_done = step == static_cast<std::int64_t>(epoch + 1) * steps_per_epoch;
    if (stop || (epoch_done && ((epoch + 1) % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs))) {
      save(epoch_done ? epoch + 1 : epoch);
    }
  }
  if (result.last_checkpoint.empty()) save(static_cast<int>(step / steps_per_epoch));
  result.steps = step;
  result.epochs = static_cast<int>(step / steps_per_epoch);
  if (!result.best_checkpoint && fs::exists(out / "best.json")) {
    std::ifstream in(out / "best.json");
    json j;
    in >> j;
    result.best_checkpoint = out / j.at("checkpoint").get<std::string>();
  }
  return result;
}

FitResult fit(const TrainConfig& cfg, const fs::path& out, const std::optional<fs::path>& resume,
              const ProgressFn& progress) {
  const NetConfig net = cfg.effective_net();
  const TrainData train = match_resolution(load_data(cfg.complete_path, cfg.partial_path, Split::train), net);
  std::optional<TrainData> val;
  if (cfg.validation_partials > 0) {
    val = match_resolution(load_data(cfg.complete_path, cfg.partial_path, Split::test), net);
  }
  return fit(cfg, train, val ? &*val : nullptr, out, resume, progress);
}

}  // namespace mpc::nets
