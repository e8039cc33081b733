#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mpc/checkpoint.hpp"
#include "mpc/container.hpp"
#include "mpc/error.hpp"
#include "mpc/evaluation.hpp"
#include "mpc/rng.hpp"
#include "mpc/trainer.hpp"

namespace mpc::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using geometry::PointCloud;

namespace {

constexpr int kViewRetries = 8;

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path manifest_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

std::vector<data::PartialMethod> parse_methods(const std::vector<std::string>& names) {
  std::vector<data::PartialMethod> out;
  for (const auto& n : names) out.push_back(data::partial_method_from_string(n));
  return out;
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return s;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".mpc") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("input not found: " + in);
    }
  }
  return files;
}

nets::TrainData partials_only(std::vector<data::PartialRecord> partials, const nets::NetConfig& net) {
  nets::TrainData d;
  d.partials = std::move(partials);
  return nets::match_resolution(std::move(d), net);
}

// ---- commands -------------------------------------------------------------

struct GenDataArgs {
  std::vector<std::string> families{"box-lid"};
  std::vector<std::size_t> counts{100};
  std::vector<std::string> methods{"view_cull"};
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  GenDataOptions o;
  o.families = a.families;
  o.counts = a.counts;
  o.methods = parse_methods(a.methods);
  o.seed = a.seed;
  const GeneratedData d = generate_data(o);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  container::write_dataset(dir / "complete.mpc", d.completes);
  container::write_partials(dir / "partial.mpc", d.partials);
  json m = run_manifest("gen-data", args);
  m["seed"] = a.seed;
  m["config"] = {{"families", a.families}, {"counts", a.counts}, {"methods", a.methods}, {"seed", a.seed}};
  m["config_hash"] = json_hash(m["config"]);
  m["outputs"] = {{"complete", "complete.mpc"}, {"partial", "partial.mpc"}};
  m["dataset_hashes"] = {{"complete.mpc", container::file_hash(dir / "complete.mpc")},
                         {"partial.mpc", container::file_hash(dir / "partial.mpc")}};
  m["records"] = {{"complete", d.completes.size()}, {"partial", d.partials.size()}};
  write_json(dir / "manifest.json", m);
  out << "wrote " << d.completes.size() << " complete and " << d.partials.size() << " partial records to "
      << dir.string() << '\n';
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string resume;
  std::vector<std::string> ablate;
  std::int64_t max_steps = -1;
  int epochs = -1;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  nets::TrainConfig cfg = nets::load_train_config(a.config);
  for (const auto& name : a.ablate) nets::apply_ablation(cfg, name);
  if (a.max_steps >= 0) cfg.max_steps = a.max_steps;
  if (a.epochs > 0) cfg.epochs = a.epochs;
  cfg.validate();
  for (const auto& p : {cfg.complete_path, cfg.partial_path}) {
    if (p.empty() || !fs::exists(p)) throw ConfigError("dataset not found: " + (p.empty() ? "(unset)" : p));
  }
  std::optional<fs::path> resume;
  if (!a.resume.empty()) resume = resolve_checkpoint(a.resume);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  json m = run_manifest("train", args);
  json cj = cfg;
  m["config"] = cj;
  m["config_hash"] = json_hash(cj);
  m["seed"] = cfg.seed;
  m["ablations"] = a.ablate;
  const nets::Lambdas l = cfg.effective_lambdas();
  m["effective_lambda"] = {{"g", l.g}, {"comp", l.comp}, {"part", l.part}, {"div", l.div}, {"kl", l.kl}};
  m["dataset_hashes"] = {{"complete", container::file_hash(cfg.complete_path)},
                         {"partial", container::file_hash(cfg.partial_path)}};
  if (resume) m["resumed_from"] = resume->string();

  int last_epoch = -1;
  const auto progress = [&](std::int64_t step, int epoch, const nets::StepResult& r) {
    if (a.quiet || epoch == last_epoch) return;
    last_epoch = epoch;
    out << "epoch " << epoch << " step " << step << " d " << r.d_loss << " total " << r.total << '\n';
  };
  const nets::FitResult res = nets::fit(cfg, dir, resume, progress);
  m["finished_at"] = utc_now();
  m["steps"] = res.steps;
  m["epochs"] = res.epochs;
  m["last_checkpoint"] = res.last_checkpoint.filename().string();
  m["checkpoint_hash"] = nets::checkpoint_hash(res.last_checkpoint);
  if (res.best_checkpoint) m["best_checkpoint"] = res.best_checkpoint->filename().string();
  write_json(dir / "manifest.json", m);
  out << "trained " << res.steps << " steps; last checkpoint " << res.last_checkpoint.string() << '\n';
  return 0;
}

struct CompleteArgs {
  std::string checkpoint;
  std::string partials;
  int K = nets::kDefaultK;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_complete(const CompleteArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path ckpt = resolve_checkpoint(a.checkpoint);
  if (a.K < 1) throw ConfigError("--K must be at least 1");
  auto model = nets::load_model(ckpt);
  model->train(false);
  const nets::TrainData d = partials_only(container::read_partials(a.partials), model->config());
  std::vector<container::Record> records;
  for (std::size_t i = 0; i < d.partials.size(); ++i) {
    const auto& p = d.partials[i];
    const auto cs = nets::sample_completions(*model, p.partial, a.K, derive_seed(a.seed, {0x5c, i}));
    for (std::size_t k = 0; k < cs.size(); ++k) records.push_back(container::cloud_record(p.id + "#" + std::to_string(k), cs[k]));
  }
  container::write_file(a.out, records);
  json m = run_manifest("complete", args);
  m["seed"] = a.seed;
  m["config"] = {{"K", a.K}, {"seed", a.seed}, {"partials", a.partials}};
  m["config_hash"] = json_hash(m["config"]);
  m["checkpoint_hash"] = nets::checkpoint_hash(ckpt);
  m["dataset_hashes"] = {{"partials", container::file_hash(a.partials)}};
  m["records"] = records.size();
  write_json(manifest_for(a.out), m);
  out << "wrote " << records.size() << " completions to " << a.out << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string complete;
  std::string partials;
  std::string dataset;
  std::string split = "test";
  int K = nets::kDefaultK;
  std::string protocol = "standard";
  std::uint64_t seed = 0;
  std::size_t max_partials = 0;
  std::string out = "report.json";
};

int cmd_eval(EvalArgs a, const std::vector<std::string>& args, std::ostream& out) {
  const fs::path ckpt = resolve_checkpoint(a.checkpoint);
  if (!a.dataset.empty()) {
    if (a.complete.empty()) a.complete = (fs::path(a.dataset) / "complete.mpc").string();
    if (a.partials.empty()) a.partials = (fs::path(a.dataset) / "partial.mpc").string();
  }
  if (a.complete.empty() || a.partials.empty()) throw ConfigError("eval needs --dataset or --complete and --partials");
  nets::Split split = nets::Split::test;
  if (a.split == "train") {
    split = nets::Split::train;
  } else if (a.split == "all") {
    split = nets::Split::all;
  } else if (a.split != "test") {
    throw ConfigError("--split must be train, test or all");
  }
  nets::EvalOptions eo;
  eo.protocol = nets::protocol_from_string(a.protocol);
  eo.K = a.K;
  eo.seed = a.seed;
  auto model = nets::load_model(ckpt);
  model->train(false);
  nets::TrainData d = nets::match_resolution(nets::load_data(a.complete, a.partials, split), model->config());
  if (d.partials.empty()) throw ConfigError("no partial shapes in the " + a.split + " split");
  if (a.max_partials > 0 && d.partials.size() > a.max_partials) d.partials.resize(a.max_partials);
  std::vector<PointCloud> test;
  for (const auto& s : d.completes) test.push_back(s.complete);
  nets::MetricsReport rep = nets::evaluate(*model, d.partials, test, eo);
  rep.checkpoint_hash = nets::checkpoint_hash(ckpt);
  json r = rep.to_json();
  r["checkpoint"] = ckpt.string();
  r["split"] = a.split;
  write_json(a.out, r);
  json m = run_manifest("eval", args);
  m["seed"] = a.seed;
  m["config"] = {{"K", a.K}, {"protocol", a.protocol}, {"split", a.split}, {"max_partials", a.max_partials}};
  m["config_hash"] = json_hash(m["config"]);
  m["checkpoint_hash"] = rep.checkpoint_hash;
  m["dataset_hashes"] = {{"complete", container::file_hash(a.complete)}, {"partial", container::file_hash(a.partials)}};
  write_json(manifest_for(a.out), m);
  out << "MMD " << rep.mmd_scaled() << " TMD " << rep.tmd_scaled();
  if (rep.uhd) out << " UHD " << *rep.uhd_scaled();
  out << " (" << nets::to_string(rep.protocol) << ", K=" << rep.K << ") -> " << a.out << '\n';
  return 0;
}

struct RenderArgs {
  std::vector<std::string> inputs;
  std::string overlay;
  std::string out;
  std::size_t max_records = 0;
};

int cmd_render(const RenderArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto files = expand_inputs(a.inputs);
  std::vector<container::Record> records;
  for (const auto& f : files) {
    auto r = container::read_file(f);
    records.insert(records.end(), r.begin(), r.end());
  }
  if (records.empty()) throw ConfigError("render: no point cloud records in the given inputs");
  if (a.max_records > 0 && records.size() > a.max_records) records.resize(a.max_records);
  std::map<std::string, PointCloud> overlays;
  if (!a.overlay.empty()) {
    for (const auto& r : container::read_file(a.overlay)) overlays.emplace(r.id, container::cloud_of(r));
  }
  const fs::path dir(a.out);
  fs::create_directories(dir);
  static const std::pair<const char*, std::pair<int, int>> kViews[] = {{"xy", {0, 1}}, {"xz", {0, 2}}, {"yz", {1, 2}}};
  std::size_t images = 0;
  for (const auto& r : records) {
    const PointCloud cloud = container::cloud_of(r);
    const PointCloud* over = nullptr;
    if (!overlays.empty()) {
      const std::string key = r.id.substr(0, r.id.rfind('#'));
      if (auto it = overlays.find(key); it != overlays.end()) over = &it->second;
    }
    for (const auto& [name, axes] : kViews) {
      std::ofstream f(dir / (safe_name(r.id) + "_" + name + ".svg"), std::ios::trunc);
      if (!f) throw IoError("cannot write into " + dir.string());
      f << render_svg(cloud, over, axes.first, axes.second, r.id + " (" + name + ")");
      ++images;
    }
  }
  json m = run_manifest("render", args);
  m["config"] = {{"inputs", a.inputs}, {"overlay", a.overlay}, {"max_records", a.max_records}};
  m["config_hash"] = json_hash(m["config"]);
  json hashes = json::object();
  for (const auto& f : files) hashes[f.filename().string()] = container::file_hash(f);
  m["dataset_hashes"] = hashes;
  m["images"] = images;
  write_json(dir / "manifest.json", m);
  out << "wrote " << images << " images to " << dir.string() << '\n';
  return 0;
}

struct TimingArgs {
  std::string checkpoint;
  int width_divisor = 1;
  int K = nets::kDefaultK;
  int repeats = 3;
};

int cmd_timing(const TimingArgs& a, std::ostream& out) {
  std::unique_ptr<nets::Model> model;
  if (!a.checkpoint.empty()) {
    model = nets::load_model(resolve_checkpoint(a.checkpoint));
  } else {
    if (a.width_divisor < 1) throw ConfigError("--width-divisor must be positive");
    model = std::make_unique<nets::Model>(nets::NetConfig{}.scaled(a.width_divisor), 0);
  }
  model->train(false);
  const auto shape = data::generate_shape("box-lid", 0);
  const PointCloud partial =
      data::resample(data::partialize_parts(shape, 0).partial, static_cast<std::size_t>(model->config().partial_points), 1);
  nets::sample_completions(*model, partial, 1, 0);  // warm-up
  std::vector<double> ms;
  for (int r = 0; r < a.repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    nets::sample_completions(*model, partial, a.K, static_cast<std::uint64_t>(r));
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const double med = ms[ms.size() / 2];
  json j = {{"K", a.K},
            {"repeats", a.repeats},
            {"median_ms_per_call", med},
            {"median_ms_per_completion", med / a.K},
            {"threads", torch::get_num_threads()}};
  out << j.dump(2) << '\n';
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const SizeError*>(&e) || dynamic_cast<const PartializationError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const json::exception*>(&e)) return 3;
  return 1;
}

}  // namespace

GeneratedData generate_data(const GenDataOptions& o) {
  if (o.families.empty()) throw ConfigError("no families given");
  if (o.methods.empty()) throw ConfigError("no partial methods given");
  if (o.counts.size() != 1 && o.counts.size() != o.families.size()) {
    throw ConfigError("give one count, or one count per family");
  }
  const auto known = data::families();
  GeneratedData d;
  for (std::size_t f = 0; f < o.families.size(); ++f) {
    const std::string& fam = o.families[f];
    if (std::find(known.begin(), known.end(), fam) == known.end()) {
      std::string list;
      for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError("unknown family '" + fam + "' (known: " + list + ")");
    }
    const std::size_t count = o.counts.size() == 1 ? o.counts[0] : o.counts[f];
    if (count >= 1000000) throw ConfigError("at most 999999 shapes per family");
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t s = o.seed * 1000000 + i;
      data::ShapeRecord shape = data::generate_shape(fam, s);
      for (data::PartialMethod m : o.methods) {
        if (m == data::PartialMethod::part_removal) {
          d.partials.push_back(data::partialize_parts(shape, s));
          continue;
        }
        for (int attempt = 0;; ++attempt) {
          const auto vp = data::random_viewpoint(derive_seed(s, {0x71e3, static_cast<std::uint64_t>(attempt)}));
          try {
            d.partials.push_back(data::partialize_view(shape, vp, s));
            break;
          } catch (const PartializationError&) {
            if (attempt + 1 == kViewRetries) throw;
          }
        }
      }
      d.completes.push_back(std::move(shape));
    }
  }
  return d;
}

fs::path resolve_checkpoint(const fs::path& path) {
  if (fs::exists(path / "manifest.json") && fs::exists(path / "params.mpc")) return path;
  for (const char* pointer : {"last.json", "best.json"}) {
    const fs::path p = path / pointer;
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    json j;
    in >> j;
    const fs::path dir = path / j.at("checkpoint").get<std::string>();
    if (fs::exists(dir / "manifest.json")) return dir;
  }
  if (path.extension() == ".json" && fs::exists(path)) {
    std::ifstream in(path);
    json j;
    in >> j;
    const fs::path dir = path.parent_path() / j.at("checkpoint").get<std::string>();
    if (fs::exists(dir / "manifest.json")) return dir;
  }
  throw ConfigError("checkpoint not found: " + path.string());
}

std::string render_svg(const PointCloud& cloud, const PointCloud* overlay, int u, int v, const std::string& title) {
  constexpr double kSize = 512.0;
  constexpr double kMargin = 16.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto extend = [&](const PointCloud& c) {
    for (const auto& p : c.points()) {
      lo = std::min({lo, p[u], p[v]});
      hi = std::max({hi, p[u], p[v]});
    }
  };
  extend(cloud);
  if (overlay) extend(*overlay);
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double scale = (kSize - 2 * kMargin) / (hi - lo);
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\" viewBox=\"0 0 "
    << kSize << ' ' << kSize << "\">\n";
  s << "<title>" << title << "</title>\n";
  s << "<style>.completion{fill:#1f5fa8}.partial{fill:#8c8c8c}</style>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto draw = [&](const PointCloud& c, const char* cls, double r) {
    s << "<g class=\"" << cls << "\">\n";
    for (const auto& p : c.points()) {
      // image y grows downwards
      s << "<circle cx=\"" << kMargin + (p[u] - lo) * scale << "\" cy=\"" << kSize - kMargin - (p[v] - lo) * scale
        << "\" r=\"" << r << "\"/>\n";
    }
    s << "</g>\n";
  };
  draw(cloud, "completion", 1.6);
  if (overlay) draw(*overlay, "partial", 1.9);
  s << "</svg>\n";
  return s.str();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string json_hash(const json& j) {
  const std::string s = j.dump();
  return container::bytes_hash(std::vector<std::uint8_t>(s.begin(), s.end()));
}

json run_manifest(const std::string& command, const std::vector<std::string>& args) {
  return {{"command", command}, {"args", args}, {"tool_version", kToolVersion}, {"started_at", utc_now()}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-modal point cloud completion toolkit", "mpc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate procedural shapes and partial scans");
  gen->add_option("--families", gd.families, "Shape families")->delimiter(',');
  gen->add_option("--count,--counts", gd.counts, "Shapes per family (one value, or one per family)")->delimiter(',');
  gen->add_option("--methods", gd.methods, "Partial methods: view_cull, part_removal")->delimiter(',');
  gen->add_option("--seed", gd.seed, "Base seed");
  gen->add_option("--out", gd.out, "Output directory")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a completion model");
  train->add_option("--config", tr.config, "JSON training config")->required();
  train->add_option("--out", tr.out, "Run directory")->required();
  train->add_option("--resume", tr.resume, "Checkpoint (or run directory) to continue from");
  train->add_option("--ablate", tr.ablate, "comp, part, div, emd_div, mapping, single_scale, idw")->delimiter(',');
  train->add_option("--max-steps", tr.max_steps, "Stop after this many steps");
  train->add_option("--epochs", tr.epochs, "Override the configured epoch count");
  train->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  CompleteArgs co;
  auto* comp = app.add_subcommand("complete", "Export K completions per partial");
  comp->add_option("--checkpoint", co.checkpoint, "Checkpoint or run directory")->required();
  comp->add_option("--partials", co.partials, "Partial container")->required();
  comp->add_option("--K", co.K, "Completions per partial");
  comp->add_option("--seed", co.seed, "Style sampling seed");
  comp->add_option("--out", co.out, "Output container")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "MMD / TMD / UHD on a dataset split");
  eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint or run directory")->required();
  eval->add_option("--dataset", ev.dataset, "Directory with complete.mpc and partial.mpc");
  eval->add_option("--complete", ev.complete, "Complete container");
  eval->add_option("--partials", ev.partials, "Partial container");
  eval->add_option("--split", ev.split, "train, test or all");
  eval->add_option("--K", ev.K, "Completions per partial");
  eval->add_option("--protocol", ev.protocol, "standard or pvd_dagger");
  eval->add_option("--seed", ev.seed, "Style sampling seed");
  eval->add_option("--max-partials", ev.max_partials, "Evaluate only the first N partials");
  eval->add_option("--out", ev.out, "Report path");

  RenderArgs re;
  auto* render = app.add_subcommand("render", "Orthographic SVG scatter plots");
  render->add_option("inputs", re.inputs, "Container files or directories")->required();
  render->add_option("--overlay", re.overlay, "Partial container drawn over matching completions");
  render->add_option("--out", re.out, "Output directory")->required();
  render->add_option("--max-records", re.max_records, "Render only the first N records");

  TimingArgs ti;
  auto* timing = app.add_subcommand("timing", "Local inference timing");
  timing->add_option("--checkpoint", ti.checkpoint, "Checkpoint (default: untrained model)");
  timing->add_option("--width-divisor", ti.width_divisor, "Width divisor of the untrained model");
  timing->add_option("--K", ti.K, "Completions per call");
  timing->add_option("--repeats", ti.repeats, "Timed calls");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mpc: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    }
    return 2;
  }

  std::vector<std::string> full{"mpc"};
  full.insert(full.end(), args.begin(), args.end());
  try {
    if (gen->parsed()) return cmd_gen_data(gd, full, out);
    if (train->parsed()) return cmd_train(tr, full, out);
    if (comp->parsed()) return cmd_complete(co, full, out);
    if (eval->parsed()) return cmd_eval(ev, full, out);
    if (render->parsed()) return cmd_render(re, full, out);
    if (timing->parsed()) return cmd_timing(ti, out);
  } catch (const std::exception& e) {
    err << "mpc: " << e.what() << '\n';
    return exit_code(e);
  }
  return 2;
}

}  // namespace mpc::cli
