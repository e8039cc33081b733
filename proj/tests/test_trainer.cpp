#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mpc/checkpoint.hpp"
#include "mpc/container.hpp"
#include "mpc/error.hpp"
#include "mpc/evaluation.hpp"
#include "mpc/metrics.hpp"
#include "mpc/rng.hpp"
#include "mpc/trainer.hpp"

namespace mpc::nets {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mpc_trainer_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TrainData tiny_data() {
  std::vector<data::ShapeRecord> shapes;
  std::vector<data::PartialRecord> partials;
  for (std::uint64_t i = 0; i < 6; ++i) {
    shapes.push_back(data::generate_shape(i % 2 ? "table" : "box-lid", 40 + i));
    partials.push_back(data::partialize_parts(shapes.back(), 7 + i));
  }
  return match_resolution(make_data(shapes, partials, Split::all), NetConfig::tiny());
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.net = NetConfig::tiny();
  c.batch_size = 2;
  c.epochs = 2;
  c.float64 = true;
  c.seed = 3;
  c.checkpoint_every = 1;
  return c;
}

double max_param_difference(const fs::path& a, const fs::path& b) {
  const auto ma = load_model(a, torch::kFloat64), mb = load_model(b, torch::kFloat64);
  const ParameterSet pa = ma->all_params(), pb = mb->all_params();
  EXPECT_EQ(pa.size(), pb.size());
  double worst = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa.items()[i].first, pb.items()[i].first);
    worst = std::max(worst, (pa.items()[i].second - pb.items()[i].second).abs().max().item<double>());
  }
  return worst;
}

TEST(TrainConfigTest, LearningRateDecaysEveryTwoEpochs) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(c.lr_g_at(0), 1e-4);
  EXPECT_DOUBLE_EQ(c.lr_g_at(1), 1e-4);
  EXPECT_NEAR(c.lr_g_at(10), 9.04e-5, 5e-8);
  EXPECT_DOUBLE_EQ(c.lr_g_at(10), 1e-4 * std::pow(0.98, 5));
}

TEST(TrainConfigTest, JsonRoundTrip) {
  TrainConfig c = tiny_config();
  c.lambdas.div = 2.5;
  c.disable_part = true;
  c.complete_path = "a.mpc";
  const nlohmann::json j = c;
  const TrainConfig back = j.get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.lambdas.div, 2.5);
  EXPECT_TRUE(back.disable_part);
}

TEST(TrainConfigTest, RejectsBadValues) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lambdas.part = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.beta2 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(TrainConfigTest, AblationsZeroTheirWeights) {
  TrainConfig c;
  for (const char* name : {"comp", "part", "div"}) apply_ablation(c, name);
  const Lambdas l = c.effective_lambdas();
  EXPECT_EQ(l.comp, 0.0);
  EXPECT_EQ(l.part, 0.0);
  EXPECT_EQ(l.div, 0.0);
  EXPECT_EQ(l.g, 1.0);
  EXPECT_THROW(apply_ablation(c, "everything"), ConfigError);
  apply_ablation(c, "single_scale");
  EXPECT_EQ(c.disc_levels(), (std::vector<int>{3}));
  apply_ablation(c, "idw");
  EXPECT_TRUE(c.effective_net().idw_interp);
}

TEST(TrainConfigTest, SeedFromEnvironment) {
  TrainConfig c;
  ::setenv("MPC_SEED", "1234", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.seed, 1234u);
  ::setenv("MPC_SEED", "12x", 1);
  EXPECT_THROW(apply_env_overrides(c), ConfigError);
  ::unsetenv("MPC_SEED");
}

TEST(TrainConfigTest, DatasetPathsResolveAgainstConfig) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"complete_path": "data/complete.mpc", "partial_path": "/abs/p.mpc", "epochs": 3})";
  const TrainConfig c = load_train_config(dir / "c.json");
  EXPECT_EQ(fs::path(c.complete_path), dir / "data/complete.mpc");
  EXPECT_EQ(c.partial_path, "/abs/p.mpc");
  EXPECT_EQ(c.epochs, 3);
  std::ofstream(dir / "bad.json") << R"({"epochs": "many"})";
  EXPECT_THROW(load_train_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_train_config(dir / "missing.json"), ConfigError);
}

TEST(MatchResolution, ResamplesToNetworkSizes) {
  const TrainData d = tiny_data();
  for (const auto& s : d.completes) {
    EXPECT_EQ(s.complete.size(), 16u);
    EXPECT_EQ(s.part_labels.size(), 16u);
  }
  for (const auto& p : d.partials) EXPECT_EQ(p.partial.size(), 16u);
}

TEST(BatchTest, ShapesAndDeterminism) {
  const TrainData d = tiny_data();
  const Batch a = assemble_batch(d, {0, 3, 5}, 9, torch::kFloat64);
  const Batch b = assemble_batch(d, {0, 3, 5}, 9, torch::kFloat64);
  EXPECT_EQ(a.X_P.sizes(), (std::vector<std::int64_t>{3, 16, 3}));
  EXPECT_EQ(a.X_GT.sizes(), (std::vector<std::int64_t>{3, 16, 3}));
  EXPECT_EQ(a.X_2.sizes(), (std::vector<std::int64_t>{3, 16, 3}));
  EXPECT_TRUE(torch::equal(a.X_2, b.X_2));
}

TEST(TrainStep, FiniteLossesAndMovingParameters) {
  const TrainConfig c = tiny_config();
  Model model(c.net, 1, torch::kFloat64);
  Optimizers opt = make_optimizers(model, c);
  const TrainData d = tiny_data();
  const Tensor before = model.all_params().tensors().front().clone();
  const StepResult r = train_step(model, opt, assemble_batch(d, {0, 1}, 2, torch::kFloat64), c, 5);
  for (double v : {r.d_loss, r.g_adv, r.comp, r.part, r.div, r.kl, r.total}) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(r.per_level.at("comp").size(), 4u);
  EXPECT_FALSE(torch::equal(before, model.all_params().tensors().front()));
}

TEST(Fit, SameSeedSameParameters) {
  const TrainData d = tiny_data();
  const fs::path dir = scratch("determinism");
  const FitResult a = fit(tiny_config(), d, nullptr, dir / "a");
  const FitResult b = fit(tiny_config(), d, nullptr, dir / "b");
  EXPECT_EQ(a.steps, 6);
  EXPECT_EQ(max_param_difference(a.last_checkpoint, b.last_checkpoint), 0.0);
  TrainConfig other = tiny_config();
  other.seed = 4;
  const FitResult c = fit(other, d, nullptr, dir / "c");
  EXPECT_GT(max_param_difference(a.last_checkpoint, c.last_checkpoint), 0.0);
}

TEST(Fit, ResumeMatchesUninterruptedRun) {
  const TrainData d = tiny_data();
  const fs::path dir = scratch("resume");
  const FitResult full = fit(tiny_config(), d, nullptr, dir / "full");
  TrainConfig first = tiny_config();
  first.epochs = 1;
  const FitResult half = fit(first, d, nullptr, dir / "split");
  EXPECT_EQ(half.steps, 3);
  const FitResult rest = fit(tiny_config(), d, nullptr, dir / "split", half.last_checkpoint);
  EXPECT_EQ(rest.steps, 6);
  // checkpoints hold float32 values, so a 64-bit resume restarts from rounded state
  EXPECT_LT(max_param_difference(full.last_checkpoint, rest.last_checkpoint), 1e-6);
}

TEST(Fit, WritesLogAndPointers) {
  const TrainData d = tiny_data();
  const fs::path dir = scratch("outputs");
  TrainConfig c = tiny_config();
  c.validation_partials = 2;
  c.validation_k = 2;
  const FitResult r = fit(c, d, &d, dir);
  EXPECT_TRUE(fs::exists(dir / "last.json"));
  EXPECT_TRUE(fs::exists(dir / "best.json"));
  ASSERT_TRUE(r.best_checkpoint);
  std::ifstream log(dir / "train.log.jsonl");
  int lines = 0;
  for (std::string line; std::getline(log, line);) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("d_loss") && j.contains("per_level") && j.contains("lr_g"));
    ++lines;
  }
  EXPECT_EQ(lines, 6);
}

TEST(Fit, EmptyTrainingSplitIsConfigError) {
  EXPECT_THROW(fit(tiny_config(), TrainData{}, nullptr, scratch("empty")), ConfigError);
}

// ---- evaluation -------------------------------------------------------------

class TinyEval : public ::testing::Test {
 protected:
  void SetUp() override {
    model = std::make_unique<Model>(NetConfig::tiny(), 5, torch::kFloat32);
    model->train(false);
    d = tiny_data();
    for (const auto& s : d.completes) test.push_back(s.complete);
  }
  std::unique_ptr<Model> model;
  TrainData d;
  std::vector<geometry::PointCloud> test;
};

TEST_F(TinyEval, FixedStyleHasZeroTmd) {
  EvalOptions eo;
  eo.K = 4;
  eo.fixed_style = normal_tensor({1, 8}, 1, torch::kFloat32);
  const MetricsReport r = evaluate(*model, d.partials, test, eo);
  EXPECT_EQ(r.tmd, 0.0);
  for (const auto& m : r.per_input) EXPECT_EQ(m.tmd, 0.0);
  eo.fixed_style.reset();
  EXPECT_GT(evaluate(*model, d.partials, test, eo).tmd, 0.0);
}

TEST_F(TinyEval, SamplingIsSeeded) {
  const auto a = sample_completions(*model, d.partials[0].partial, 3, 8);
  const auto b = sample_completions(*model, d.partials[0].partial, 3, 8);
  const auto c = sample_completions(*model, d.partials[0].partial, 3, 9);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[2].points(), b[2].points());
  EXPECT_NE(a[2].points(), c[2].points());
}

TEST_F(TinyEval, StandardReportMatchesMetricFunctions) {
  EvalOptions eo;
  eo.K = 3;
  eo.seed = 4;
  const MetricsReport r = evaluate(*model, d.partials, test, eo);
  std::vector<geometry::PointCloud> pool;
  double tmd = 0, uhd = 0;
  for (std::size_t i = 0; i < d.partials.size(); ++i) {
    const auto cs = sample_completions(*model, d.partials[i].partial, 3, derive_seed(4, {0x5c, i}));
    tmd += metrics::tmd(cs);
    uhd += metrics::uhd_metric(d.partials[i].partial, cs);
    pool.insert(pool.end(), cs.begin(), cs.end());
  }
  const double n = static_cast<double>(d.partials.size());
  EXPECT_DOUBLE_EQ(r.tmd, tmd / n);
  EXPECT_DOUBLE_EQ(*r.uhd, uhd / n);
  EXPECT_DOUBLE_EQ(r.mmd, metrics::mmd(test, pool));
  EXPECT_EQ(r.mmd_scaled(), r.mmd * 1e3);
}

TEST_F(TinyEval, PvdDaggerOmitsUhd) {
  EvalOptions eo;
  eo.K = 2;
  eo.protocol = Protocol::pvd_dagger;
  const MetricsReport r = evaluate(*model, d.partials, test, eo);
  EXPECT_FALSE(r.uhd);
  EXPECT_TRUE(r.to_json()["raw"]["uhd"].is_null());
  EXPECT_EQ(protocol_from_string("pvd_dagger"), Protocol::pvd_dagger);
  EXPECT_THROW(protocol_from_string("dagger"), ConfigError);
}

TEST_F(TinyEval, RejectsSingleCompletion) {
  EvalOptions eo;
  eo.K = 1;
  EXPECT_THROW(evaluate(*model, d.partials, test, eo), ConfigError);
}

}  // namespace
}  // namespace mpc::nets
