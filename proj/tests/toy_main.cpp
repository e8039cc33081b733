// Runs (or resumes) toy ablation runs into the cache, one per variant and
// seed, then prints the medians. Used to fill the cache ahead of the
// acceptance suite.

#include <iostream>

#include "CLI11.hpp"
#include "toy_ablation.hpp"

int main(int argc, char** argv) {
  CLI::App app("toy ablation driver");
  std::string cache = MPC_TOY_CACHE;
  std::vector<std::string> variants = mpc::toy::kVariants;
  std::vector<std::uint64_t> seeds;
  int epochs = 0;
  double lr = 0;
  bool lid_check = false;
  app.add_option("--cache", cache);
  app.add_option("--variants", variants)->delimiter(',');
  app.add_option("--seeds", seeds)->delimiter(',');
  app.add_option("--epochs", epochs);
  app.add_option("--lr", lr);
  app.add_flag("--lid-check", lid_check, "check the lid detector on ground truth and exit");
  CLI11_PARSE(app, argc, argv);

  mpc::toy::Settings s = mpc::toy::default_settings(cache);
  if (epochs > 0) s.epochs = epochs;
  if (lr > 0) s.train.lr_g = s.train.lr_d = lr;
  if (!seeds.empty()) s.seeds = seeds;
  std::cout << "settings " << s.hash() << ' ' << s.to_json().dump() << '\n';
  const mpc::toy::Dataset d = mpc::toy::load_or_generate(s, std::cout);
  std::cout << d.train.partials.size() << " train / " << d.test.partials.size() << " test partials\n";

  if (lid_check) {
    std::size_t n = 0, right = 0, lidless = 0, lidless_right = 0;
    for (std::size_t i = 0; i < d.test.partials.size(); ++i) {
      const auto& p = d.test.partials[i];
      if (!mpc::toy::lid_removed_with_walls(p)) continue;
      const auto& src = d.test.completes[d.test.source[i]];
      const bool truth = src.latent_factors.at(3) > 0.5;
      const bool said = mpc::toy::lid_present(src.complete, p.partial);
      (truth ? n : lidless) += 1;
      (truth ? right : lidless_right) += said == truth ? 1 : 0;
    }
    std::cout << "lid boxes " << right << "/" << n << " lidless boxes " << lidless_right << "/" << lidless << '\n';
    return 0;
  }

  std::vector<mpc::toy::RunMetrics> runs;
  for (std::uint64_t seed : s.seeds) {
    for (const auto& v : variants) runs.push_back(mpc::toy::run(s, d, v, seed, std::cout));
  }
  const mpc::toy::Verdict verdict = mpc::toy::judge(runs);
  for (const auto& [name, m] : verdict.median) {
    std::cout << name << " mmd " << m.mmd << " tmd " << m.tmd << " uhd " << m.uhd << " lid " << m.lid_both_fraction
              << '\n';
  }
  std::cout << "a " << verdict.a << " b " << verdict.b << " c " << verdict.c << " d " << verdict.d << " max run h "
            << verdict.max_run_hours << " total h " << verdict.total_hours << '\n';
  return 0;
}
