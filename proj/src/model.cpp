#include "mpc/model.hpp"

#include <algorithm>

#include "mpc/error.hpp"

namespace mpc::nets {

int NetConfig::level_points(int i) const {
  int n = seeds;
  for (int s = 0; s < i; ++s) n *= up_rate;
  return n;
}

void NetConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("network config: " + m); };
  if (enc_mlp.empty() || enc_head.empty() || style_mlp.empty() || disc_mlp.empty()) fail("empty layer list");
  if (enc_levels < 1) fail("enc_levels must be at least 1");
  if (partial_points < 2 || (partial_points >> (enc_levels - 1)) < 1) fail("too few partial points for enc_levels");
  if ((partial_points >> (enc_levels - 1)) << (enc_levels - 1) != partial_points) {
    fail("partial_points must be divisible by 2^(enc_levels - 1)");
  }
  if (seeds < 1 || seeds % local_points() != 0) fail("seeds must be a positive multiple of the local point count");
  if (up_rate < 1) fail("up_rate must be positive");
  if (rho.empty()) fail("need at least one upsampling stage");
  if (level_points(stages()) != complete_points) {
    fail("seeds * up_rate^stages = " + std::to_string(level_points(stages())) + " but complete_points = " +
         std::to_string(complete_points));
  }
  if (z_dim < 1) fail("z_dim must be positive");
  if (pointconv_k < 1 || attn_k < 1 || interp_k < 1) fail("neighbourhood sizes must be positive");
  if (!idw_interp && interp_k > seeds) fail("interp_k exceeds the seed count");
}

NetConfig NetConfig::scaled(int divisor) const {
  if (divisor < 1) throw ConfigError("network config: width divisor must be positive");
  NetConfig c = *this;
  auto div = [divisor](int w) { return std::max(1, w / divisor); };
  auto div_all = [&](std::vector<int>& v) {
    for (int& w : v) w = div(w);
  };
  div_all(c.enc_mlp);
  div_all(c.enc_head);
  div_all(c.style_mlp);
  div_all(c.disc_mlp);
  div_all(c.disc_head);
  c.weightnet_hidden = div(weightnet_hidden);
  c.basis = div(basis);
  c.seed_width = div(seed_width);
  c.seed_hidden = div(seed_hidden);
  return c;
}

NetConfig NetConfig::tiny() {
  NetConfig c = NetConfig{}.scaled(8);
  c.partial_points = 16;
  c.enc_levels = 4;
  c.seeds = 2;
  c.complete_points = 16;
  c.interp_k = 2;
  c.attn_k = 4;
  c.pointconv_k = 4;
  return c;
}

void to_json(nlohmann::json& j, const NetConfig& c) {
  j = {{"partial_points", c.partial_points},
       {"complete_points", c.complete_points},
       {"enc_mlp", c.enc_mlp},
       {"enc_levels", c.enc_levels},
       {"enc_head", c.enc_head},
       {"pointconv_k", c.pointconv_k},
       {"weightnet_hidden", c.weightnet_hidden},
       {"basis", c.basis},
       {"style_mlp", c.style_mlp},
       {"z_dim", c.z_dim},
       {"mod_layers", c.mod_layers},
       {"mapping_style", c.mapping_style},
       {"mapping_mlp", c.mapping_mlp},
       {"seeds", c.seeds},
       {"seed_width", c.seed_width},
       {"seed_hidden", c.seed_hidden},
       {"attn_k", c.attn_k},
       {"interp_k", c.interp_k},
       {"up_rate", c.up_rate},
       {"rho", c.rho},
       {"idw_interp", c.idw_interp},
       {"disc_mlp", c.disc_mlp},
       {"disc_head", c.disc_head},
       {"leaky_slope", c.leaky_slope}};
}

void from_json(const nlohmann::json& j, NetConfig& c) {
  NetConfig d;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  c = d;
  if (j.contains("width_divisor")) c = d.scaled(j.at("width_divisor").get<int>());
  get("partial_points", c.partial_points);
  get("complete_points", c.complete_points);
  get("enc_mlp", c.enc_mlp);
  get("enc_levels", c.enc_levels);
  get("enc_head", c.enc_head);
  get("pointconv_k", c.pointconv_k);
  get("weightnet_hidden", c.weightnet_hidden);
  get("basis", c.basis);
  get("style_mlp", c.style_mlp);
  get("z_dim", c.z_dim);
  get("mod_layers", c.mod_layers);
  get("mapping_style", c.mapping_style);
  get("mapping_mlp", c.mapping_mlp);
  get("seeds", c.seeds);
  get("seed_width", c.seed_width);
  get("seed_hidden", c.seed_hidden);
  get("attn_k", c.attn_k);
  get("interp_k", c.interp_k);
  get("up_rate", c.up_rate);
  get("rho", c.rho);
  get("idw_interp", c.idw_interp);
  get("disc_mlp", c.disc_mlp);
  get("disc_head", c.disc_head);
  get("leaky_slope", c.leaky_slope);
}

Model::Model(const NetConfig& cfg, std::uint64_t init_seed, torch::Dtype dtype) : cfg_(cfg), dtype_(dtype) {
  cfg.validate();
  gen = Generator(cfg);
  style = StyleEncoder(cfg);
  if (cfg.mapping_style) mapping = MappingNetwork(cfg);
  disc = DiscriminatorBank(cfg);
  gen->to(dtype);
  style->to(dtype);
  if (mapping) mapping->to(dtype);
  disc->to(dtype);
  init_parameters(all_params(), init_seed);
}

ParameterSet Model::generator_params() const {
  ParameterSet p = ParameterSet::of(*gen, "gen.");
  if (mapping) {
    p.append(ParameterSet::of(*mapping, "mapping."));
  } else {
    p.append(ParameterSet::of(*style, "style."));
  }
  return p;
}

ParameterSet Model::discriminator_params() const { return ParameterSet::of(*disc, "disc."); }

ParameterSet Model::all_params() const {
  ParameterSet p = generator_params();
  p.append(discriminator_params());
  return p;
}

Tensor Model::inference_styles(std::int64_t count, std::uint64_t seed) {
  const Tensor noise = normal_tensor({count, cfg_.z_dim}, seed, dtype_);
  return mapping ? mapping->forward(noise) : noise;
}

void Model::train(bool on) {
  gen->train(on);
  style->train(on);
  if (mapping) mapping->train(on);
  disc->train(on);
}

}  // namespace mpc::nets
