// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. --only 1,3 restricts the run.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "mpc/checkpoint.hpp"
#include "mpc/container.hpp"
#include "mpc/error.hpp"
#include "mpc/evaluation.hpp"
#include "mpc/geometry.hpp"
#include "mpc/layers.hpp"
#include "mpc/losses.hpp"
#include "mpc/metrics.hpp"
#include "mpc/model.hpp"
#include "mpc/rng.hpp"
#include "mpc/trainer.hpp"
#include "oracles.hpp"
#include "toy_ablation.hpp"

namespace fs = std::filesystem;
using namespace mpc;
using namespace mpc::nets;
using mpc::testing::rel_err;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << x;
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mpc_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---- 1 ---------------------------------------------------------------------

Outcome metric_oracles() {
  Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.below(64), m = 1 + rng.below(64), e = 1 + rng.below(6);
    const auto p = testing::random_cloud(n, 1000 + t);
    const auto q = testing::random_cloud(m, 2000 + t, 1.5);
    const auto a = testing::random_cloud(e, 3000 + t);
    const auto b = testing::random_cloud(e, 4000 + t, 0.7);
    worst = std::max(worst, rel_err(geometry::chamfer(p, q), testing::chamfer_oracle(p, q)));
    worst = std::max(worst, rel_err(geometry::uhd(p, q), testing::uhd_oracle(p, q)));
    worst = std::max(worst, rel_err(geometry::emd(a, b), testing::emd_oracle(a, b)));
  }
  return {worst <= 1e-9, "50 instances, max rel error " + fmt(worst)};
}

// ---- 2 ---------------------------------------------------------------------

// Rows whose modulated energy sum_j (w_ij s_j)^2 falls below 1e6 eps are
// degenerate: eps then visibly shrinks the norm. They are held to (0, 1] only.
Outcome demodulation_invariants() {
  Rng rng(202);
  double lowest = 1, highest = 0, lowest_regular = 1, drift = 0;
  int regular = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto out = static_cast<std::int64_t>(1 + rng.below(16));
    const auto in = static_cast<std::int64_t>(1 + rng.below(16));
    const auto b = static_cast<std::int64_t>(1 + rng.below(4));
    const Tensor w = normal_tensor({out, in}, derive_seed(202, {1, static_cast<std::uint64_t>(t)}), torch::kFloat64);
    const Tensor s = normal_tensor({b, in}, derive_seed(202, {2, static_cast<std::uint64_t>(t)}), torch::kFloat64)
                         .abs() +
                     0.05;
    const double c = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    const Tensor wpp = modulate_weights(w, s);
    const Tensor norms = wpp.pow(2).sum(-1).sqrt();
    lowest = std::min(lowest, norms.min().item<double>());
    highest = std::max(highest, norms.max().item<double>());
    const double energy = (w.unsqueeze(0) * s.unsqueeze(1) * std::min(c, 1.0)).pow(2).sum(-1).min().item<double>();
    if (energy < 1e6 * 1e-8) continue;
    ++regular;
    lowest_regular = std::min(lowest_regular, norms.min().item<double>());
    drift = std::max(drift, (modulate_weights(w, s * c) - wpp).abs().max().item<double>());
  }
  const bool ok = lowest > 0 && highest <= 1 && lowest_regular >= 1 - 1e-6 && drift <= 1e-6 && regular >= 900;
  return {ok, "1000 trials (" + std::to_string(regular) + " non-degenerate), norms in [" + fmt(lowest) + ", " +
                  fmt(highest) + "], non-degenerate min " + fmt(lowest_regular) + ", scaling drift " + fmt(drift)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome gradient_checks() {
  const auto f64 = torch::kFloat64;
  const NetConfig cfg = NetConfig::tiny();
  Model model(cfg, 21, f64);
  const Tensor X_P = normal_tensor({2, cfg.partial_points, 3}, 1, f64) * 0.5;
  const Tensor X_GT = normal_tensor({2, cfg.complete_points, 3}, 2, f64) * 0.5;
  const Tensor z1 = normal_tensor({2, cfg.z_dim}, 3, f64);
  const Tensor z2 = normal_tensor({2, cfg.z_dim}, 4, f64);
  const std::vector<int> all{0, 1, 2, 3};
  std::vector<Tensor> gt;
  for (int i = 0; i < cfg.levels(); ++i) gt.push_back(X_GT.narrow(1, 0, cfg.level_points(i)));
  auto pyr = [&](const Tensor& z) { return model.complete(X_P, z).pyramid.points; };
  auto mixes = [&](const std::vector<Tensor>& p, bool masked) {
    std::vector<Tensor> f;
    for (int i = 0; i < cfg.levels(); ++i) {
      const DiscriminatorOutput o = model.disc->forward(i, p[i]);
      f.push_back(masked ? masked_mix_pool(o, p[i], X_P, 0.05).f_mix : o.f_mix);
    }
    return f;
  };
  const Critic critic = bank_critic(model.disc);

  std::vector<std::pair<std::string, std::function<GradCheckResult()>>> checks;
  const ParameterSet gp = model.generator_params();
  checks.emplace_back("d_loss", [&] {
    std::vector<Tensor> fakes;
    for (const auto& t : pyr(z1)) fakes.push_back(t.detach());
    return grad_check([&] { return d_loss(gt, fakes, critic, 1.0, all); }, model.discriminator_params(), 1e-5, 99);
  });
  checks.emplace_back("g_adv", [&] { return grad_check([&] { return g_adv_loss(pyr(z1), critic, all); }, gp, 1e-5, 99); });
  checks.emplace_back("comp", [&] { return grad_check([&] { return comp_loss(pyr(z1), gt); }, gp, 1e-5, 99); });
  checks.emplace_back("part", [&] { return grad_check([&] { return part_loss({pyr(z1), pyr(z2)}, X_P); }, gp, 1e-5, 99); });
  checks.emplace_back("div", [&] {
    return grad_check([&] { return div_loss(mixes(pyr(z1), true), mixes(pyr(z2), true)); }, gp, 1e-5, 99);
  });
  checks.emplace_back("emd_div", [&] { return grad_check([&] { return emd_div_loss(pyr(z1), pyr(z2)); }, gp, 1e-5, 99); });
  checks.emplace_back("kl", [&] {
    return grad_check([&] { return kl_loss(model.style->forward(X_GT)); }, ParameterSet::of(*model.style, "style."),
                      1e-5, 99);
  });
  checks.emplace_back("total", [&] {
    return grad_check(
        [&] {
          const StyleDistribution d1 = model.style->forward(X_GT);
          const auto p1 = pyr(sample_style(d1, 7));
          const auto p2 = pyr(z2);
          return total_generator_loss(g_adv_loss(p1, critic, all), comp_loss(p1, gt), part_loss({p1, p2}, X_P),
                                      div_loss(mixes(p1, false), mixes(p2, false)), kl_loss(d1), Lambdas{})
              .total;
        },
        gp, 1e-5, 99);
  });

  bool ok = true;
  std::string detail;
  for (auto& [name, run] : checks) {
    const GradCheckResult r = run();
    const bool pass = r.max_rel_error < 1e-4 && r.gradient_norm > 0;
    ok = ok && pass;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(r.max_rel_error);
  }
  return {ok, "max rel error: " + detail};
}

// ---- 4 ---------------------------------------------------------------------

Outcome dimension_contract() {
  torch::NoGradGuard g;
  Model model(NetConfig{}, 11, torch::kFloat32);
  model.train(false);
  const auto shape = data::generate_shape("box-lid", 4);
  const auto cloud = data::resample(shape.complete, 1024, 1);
  std::vector<float> flat;
  for (const auto& p : cloud.points()) flat.insert(flat.end(), {float(p[0]), float(p[1]), float(p[2])});
  const Tensor X_P = torch::tensor(flat).view({1, 1024, 3});
  const Completion c = model.complete(X_P, model.inference_styles(1, 3));
  using S = std::vector<std::int64_t>;
  std::vector<std::pair<std::string, bool>> parts{
      {"F_0", c.partial.F0.sizes() == S{1, 1024, 16}},
      {"X_L", c.partial.X_L.sizes() == S{1, 128, 3}},
      {"F_L", c.partial.F_L.sizes() == S{1, 128, 256}},
      {"f_P", c.partial.f_P.sizes() == S{1, 512}},
      {"seeds", c.seeds.S.sizes() == S{1, 256, 3} && c.seeds.F.sizes() == S{1, 256, 128}},
  };
  bool pyramid = c.pyramid.points.size() == 4;
  for (std::size_t i = 0; pyramid && i < 4; ++i) {
    pyramid = c.pyramid.points[i].sizes() == S{1, 256 << i, 3};
  }
  parts.emplace_back("pyramid", pyramid);
  bool mix = true;
  for (int i = 0; i < 4; ++i) mix = mix && model.disc->forward(i, c.pyramid.points[i]).f_mix.sizes() == S{1, 2048};
  parts.emplace_back("f_mix", mix);
  bool ok = true;
  std::string bad;
  for (const auto& [name, pass] : parts) {
    ok = ok && pass;
    if (!pass) bad += " " + name;
  }
  return {ok, ok ? "F_0 1024x16, X_L 128, F_L 128x256, f_P 512, seeds 256x(3,128), pyramid 256..2048, f_mix 2048"
                 : "mismatch:" + bad};
}

// ---- 5 ---------------------------------------------------------------------

Outcome determinism() {
  cli::GenDataOptions o;
  o.families = {"box-lid"};
  o.counts = {60};
  o.methods = {data::PartialMethod::part_removal};
  o.seed = 5;
  const cli::GeneratedData g = cli::generate_data(o);
  TrainConfig cfg;
  cfg.net = toy::default_settings("").train.net;
  cfg.batch_size = 8;
  cfg.float64 = true;
  cfg.max_steps = 50;
  cfg.epochs = 100;
  cfg.seed = 17;
  const TrainData train = match_resolution(make_data(g.completes, g.partials, Split::all), cfg.net);
  const fs::path dir = scratch("determinism");
  const FitResult a = fit(cfg, train, nullptr, dir / "a");
  const FitResult b = fit(cfg, train, nullptr, dir / "b");
  const auto ma = load_model(a.last_checkpoint, torch::kFloat64);
  const auto mb = load_model(b.last_checkpoint, torch::kFloat64);
  const ParameterSet pa = ma->all_params(), pb = mb->all_params();
  double worst = 0;
  bool same_names = pa.size() == pb.size();
  for (std::size_t i = 0; same_names && i < pa.size(); ++i) {
    same_names = pa.items()[i].first == pb.items()[i].first;
    if (same_names) worst = std::max(worst, (pa.items()[i].second - pb.items()[i].second).abs().max().item<double>());
  }
  const bool steps = a.steps == 50 && b.steps == 50;
  fs::remove_all(dir);
  return {same_names && steps && worst <= 1e-6,
          "2 x " + std::to_string(a.steps) + " steps, " + std::to_string(pa.coordinate_count()) +
              " coordinates, max difference " + fmt(worst)};
}

// ---- 6 ---------------------------------------------------------------------

cli::GeneratedData eval_inputs(std::uint64_t seed) {
  cli::GenDataOptions o;
  o.families = {"box-lid", "tripod-lamp", "table"};
  o.counts = {1};
  o.methods = {data::PartialMethod::view_cull};
  o.seed = seed;
  return cli::generate_data(o);
}

std::vector<geometry::PointCloud> completes_of(const cli::GeneratedData& g) {
  std::vector<geometry::PointCloud> out;
  for (const auto& s : g.completes) out.push_back(s.complete);
  return out;
}

Outcome frozen_style() {
  Model model(NetConfig{}, 12, torch::kFloat32);
  model.train(false);
  const cli::GeneratedData g = eval_inputs(6);
  EvalOptions eo;
  eo.K = 10;
  eo.fixed_style = normal_tensor({1, 8}, 66, torch::kFloat32);
  const MetricsReport r = evaluate(model, g.partials, completes_of(g), eo);
  double worst = 0;
  for (const auto& m : r.per_input) worst = std::max(worst, m.tmd);
  eo.fixed_style.reset();
  const MetricsReport free = evaluate(model, g.partials, completes_of(g), eo);
  return {worst == 0.0 && r.tmd == 0.0,
          std::to_string(r.per_input.size()) + " partials, K=10, fixed-style TMD " + fmt(worst) + " (sampled " +
              fmt(free.tmd) + ")"};
}

// ---- 7 ---------------------------------------------------------------------

Outcome toy_ablation(const fs::path& cache) {
  const toy::Settings s = toy::default_settings(cache);
  const toy::Dataset d = toy::load_or_generate(s, std::cerr);
  std::vector<toy::RunMetrics> runs;
  for (std::uint64_t seed : s.seeds) {
    for (const auto& v : toy::kVariants) runs.push_back(toy::run(s, d, v, seed, std::cerr));
  }
  const toy::Verdict v = toy::judge(runs);
  const auto& full = v.median.at("full");
  std::string detail = "medians over " + std::to_string(s.seeds.size()) + " seeds: ";
  detail += std::string("a ") + (v.a ? "ok" : "no") + " (TMD " + fmt(full.tmd) + " vs " + fmt(v.median.at("div").tmd) +
            ")";
  detail += std::string(", b ") + (v.b ? "ok" : "no") + " (UHD " + fmt(full.uhd) + " vs " +
            fmt(v.median.at("part").uhd) + ")";
  detail += std::string(", c ") + (v.c ? "ok" : "no") + " (MMD " + fmt(full.mmd) + " vs " +
            fmt(v.median.at("comp").mmd) + ")";
  detail += std::string(", d ") + (v.d ? "ok" : "no") + " (lid both " + fmt(full.lid_both_fraction) + ")";
  const bool budget = v.max_run_hours <= 4.0;
  detail += ", longest run " + fmt(v.max_run_hours) + " h CPU, all runs " + fmt(v.total_hours) + " h";
  return {v.a && v.b && v.c && v.d && budget, detail};
}

// ---- 8 ---------------------------------------------------------------------

Outcome kl_spot_values() {
  auto kl = [](double mu, double sigma) {
    return kl_to_standard_normal({torch::full({1, 8}, mu, torch::kFloat64), torch::full({1, 8}, sigma, torch::kFloat64)})
        .item<double>();
  };
  const double a = kl(0, 1), b = kl(1, 1);
  return {std::abs(a) <= 1e-9 && std::abs(b - 4.0) <= 1e-9, "(0,1) -> " + fmt(a) + ", (1,1) -> " + fmt(b)};
}

// ---- 9 ---------------------------------------------------------------------

Outcome protocol_parity() {
  Model model(NetConfig{}, 13, torch::kFloat32);
  model.train(false);
  const cli::GeneratedData g = eval_inputs(9);
  const auto test = completes_of(g);
  EvalOptions eo;
  eo.K = 10;
  eo.seed = 909;
  const MetricsReport st = evaluate(model, g.partials, test, eo);
  eo.protocol = Protocol::pvd_dagger;
  const MetricsReport pv = evaluate(model, g.partials, test, eo);

  auto convention = [](const nlohmann::json& j, bool with_uhd) {
    const auto& raw = j.at("raw");
    const auto& sc = j.at("scaled");
    bool ok = sc.at("mmd").get<double>() == raw.at("mmd").get<double>() * 1e3 &&
              sc.at("tmd").get<double>() == raw.at("tmd").get<double>() * 1e2;
    if (with_uhd) {
      ok = ok && sc.at("uhd").is_number() && sc.at("uhd").get<double>() == raw.at("uhd").get<double>() * 1e2;
    } else {
      ok = ok && raw.at("uhd").is_null() && sc.at("uhd").is_null();
    }
    return ok;
  };
  const bool scaled = convention(st.to_json(), true) && convention(pv.to_json(), false);

  // Hand-rolled: the same completions, 1024-point subsets, brute-force chamfer.
  double worst = 0;
  bool subsets = true;
  double tmd_sum = 0;
  for (std::size_t i = 0; i < g.partials.size(); ++i) {
    const auto cs = sample_completions(model, g.partials[i].partial, 10, derive_seed(eo.seed, {0x5c, i}));
    std::vector<geometry::PointCloud> sub;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      sub.push_back(data::resample(cs[k], kPvdPoints, pvd_resample_seed(eo.seed, i, k)));
      subsets = subsets && sub.back().size() == 1024 && cs[k].size() == 2048;
      for (const auto& p : sub.back().points()) subsets = subsets && testing::min_dist2(p, cs[k]) == 0.0;
    }
    double t = 0;
    for (std::size_t j = 0; j < sub.size(); ++j) {
      double row = 0;
      for (std::size_t l = 0; l < sub.size(); ++l) {
        if (l != j) row += testing::chamfer_oracle(sub[j], sub[l]);
      }
      t += row / static_cast<double>(sub.size() - 1);
    }
    worst = std::max(worst, rel_err(pv.per_input[i].tmd, t));
    tmd_sum += t;
  }
  worst = std::max(worst, rel_err(pv.tmd, tmd_sum / static_cast<double>(g.partials.size())));
  return {scaled && subsets && worst <= 1e-9,
          std::string("scaled fields ") + (scaled ? "exact" : "wrong") + ", 1024-point subsets " +
              (subsets ? "yes" : "no") + ", pvd TMD vs oracle rel error " + fmt(worst) + " on 3 partials"};
}

// ---- 10 --------------------------------------------------------------------

std::vector<container::Record> mixed_records() {
  std::vector<container::Record> out;
  const auto fams = data::families();
  for (std::size_t i = 0; out.size() < 500; ++i) {
    const auto shape = data::generate_shape(fams[i % fams.size()], 10000 + i);
    switch (i % 4) {
      case 0:
        out.push_back(container::to_record(shape));
        break;
      case 1:
        out.push_back(container::cloud_record("cloud-" + std::to_string(i), data::resample(shape.complete, 1 + i % 97, i)));
        break;
      case 2: {
        container::Record r = container::to_record(shape);
        r.labels.reset();
        out.push_back(r);
        break;
      }
      default:
        out.push_back(container::Record{"empty-" + std::to_string(i), {}, std::nullopt, std::vector<float>{}});
    }
  }
  return out;
}

Outcome dataset_round_trip() {
  const auto recs = mixed_records();
  const fs::path dir = scratch("roundtrip");
  container::write_file(dir / "a.mpc", recs);
  const auto back = container::read_file(dir / "a.mpc");
  container::write_file(dir / "b.mpc", back);
  const auto a = container::read_bytes(dir / "a.mpc");
  const bool identical = back == recs && a == container::read_bytes(dir / "b.mpc") && a == container::encode(recs);

  struct Fixture {
    std::string name;
    std::vector<std::uint8_t> bytes;
  };
  std::vector<Fixture> fx;
  auto bad = a;
  bad[0] = 'X';
  fx.push_back({"magic", bad});
  bad = a;
  bad[4] = 9;
  fx.push_back({"version", bad});
  bad = a;
  bad.resize(a.size() / 2);
  fx.push_back({"truncated", bad});
  bad = a;
  bad[12 + 4 + recs[0].id.size() + 4 + 12 * recs[0].point_count()] = 7;  // has_labels flag of record 0
  fx.push_back({"flag", bad});
  bad = a;
  bad.insert(bad.end(), {1, 2, 3});
  fx.push_back({"trailing", bad});

  int rejected = 0;
  std::string offsets;
  for (const auto& f : fx) {
    try {
      container::decode(f.bytes);
    } catch (const FormatError& e) {
      const bool named = std::string(e.what()).find("offset " + std::to_string(e.offset())) != std::string::npos;
      rejected += named ? 1 : 0;
      offsets += " " + f.name + "@" + std::to_string(e.offset());
    }
  }
  fs::remove_all(dir);
  return {identical && rejected == 5, std::to_string(recs.size()) + " records " +
                                          (identical ? "byte-identical" : "DIFFER") + ", " + std::to_string(rejected) +
                                          "/5 corruptions rejected:" + offsets};
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<int> only;
  std::string cache = MPC_TOY_CACHE;
  app.add_option("--only", only)->delimiter(',');
  app.add_option("--toy-cache", cache);
  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(1);

  const std::vector<Criterion> all{
      {1, "metric oracles", 10, metric_oracles},
      {2, "demodulation invariants", 5, demodulation_invariants},
      {3, "gradient checks", 120, gradient_checks},
      {4, "architecture dimensions", 5, dimension_contract},
      {5, "training determinism", 300, determinism},
      {6, "frozen-style degeneracy", 30, frozen_style},
      {7, "toy ablation directions", 4 * 3600.0 * 12, [&] { return toy_ablation(cache); }},
      {8, "KL spot values", 1, kl_spot_values},
      {9, "protocol parity", 60, protocol_parity},
      {10, "dataset round trip", 10, dataset_round_trip},
  };
  const std::set<int> chosen(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!chosen.empty() && chosen.count(c.id) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail << " ["
              << fmt(secs) << " s" << (in_time ? "" : ", over the " + fmt(c.limit_seconds) + " s limit") << "]"
              << std::endl;
  }
  return failed;
}
