#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace mpc::nets {

// Widths and point counts of every network. Defaults are the full-size
// architecture; scaled() divides widths for toy runs and tiny() also shrinks
// the point counts for finite-difference checks.
struct NetConfig {
  int partial_points = 1024;
  int complete_points = 2048;

  // partial encoder
  std::vector<int> enc_mlp{16, 16, 16};
  int enc_levels = 4;
  std::vector<int> enc_head{512, 512};
  int pointconv_k = 16;
  int weightnet_hidden = 16;
  int basis = 16;

  // style
  std::vector<int> style_mlp{64, 128, 256, 512};
  int z_dim = 8;
  int mod_layers = 4;
  bool mapping_style = false;  // ablation: z from a mapping network on N(0, I)
  std::vector<int> mapping_mlp{8, 8, 8, 8};

  // generator
  int seeds = 256;
  int seed_width = 128;
  int seed_hidden = 256;
  int attn_k = 20;
  int interp_k = 8;
  int up_rate = 2;
  std::vector<double> rho{0.25, 0.15, 0.1};
  bool idw_interp = false;  // ablation: inverse-distance seed interpolation

  // discriminator
  std::vector<int> disc_mlp{128, 256, 512, 1024};
  std::vector<int> disc_head{512, 256, 64};
  double leaky_slope = 0.2;

  int partial_width() const { return enc_head.back(); }
  int local_width() const { return enc_mlp.back() << enc_levels; }
  int local_points() const { return partial_points >> (enc_levels - 1); }
  int stages() const { return static_cast<int>(rho.size()); }
  int levels() const { return stages() + 1; }
  // Point count of pyramid level i (0 = seeds).
  int level_points(int i) const;
  int mix_width() const { return 2 * disc_mlp.back(); }

  // Throws ConfigError when the point counts and rates are inconsistent.
  void validate() const;

  NetConfig scaled(int divisor) const;
  // Widths / 8 and 16-point clouds.
  static NetConfig tiny();
};

void to_json(nlohmann::json& j, const NetConfig& c);
void from_json(const nlohmann::json& j, NetConfig& c);

}  // namespace mpc::nets
