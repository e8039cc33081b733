#include "mpc/evaluation.hpp"

#include "mpc/error.hpp"
#include "mpc/metrics.hpp"
#include "mpc/rng.hpp"

namespace mpc::nets {

using geometry::PointCloud;

std::string to_string(Protocol p) { return p == Protocol::standard ? "standard" : "pvd_dagger"; }

Protocol protocol_from_string(const std::string& s) {
  if (s == "standard") return Protocol::standard;
  if (s == "pvd_dagger" || s == "pvd") return Protocol::pvd_dagger;
  throw ConfigError("unknown protocol '" + s + "' (expected standard or pvd_dagger)");
}

std::vector<std::vector<PointCloud>> complete_levels(Model& model, const PointCloud& partial, const Tensor& z) {
  torch::NoGradGuard guard;
  const std::int64_t K = z.size(0);
  const Tensor xp = points_tensor(partial, model.dtype()).unsqueeze(0).expand({K, -1, -1}).contiguous();
  const Completion c = model.complete(xp, z.to(model.dtype()));
  std::vector<std::vector<PointCloud>> out(static_cast<std::size_t>(K));
  for (std::int64_t k = 0; k < K; ++k) {
    for (const Tensor& level : c.pyramid.points) out[static_cast<std::size_t>(k)].push_back(cloud_of(level[k]));
  }
  return out;
}

std::vector<PointCloud> complete_with_styles(Model& model, const PointCloud& partial, const Tensor& z) {
  torch::NoGradGuard guard;
  const std::int64_t K = z.size(0);
  const Tensor xp = points_tensor(partial, model.dtype()).unsqueeze(0).expand({K, -1, -1}).contiguous();
  const Completion c = model.complete(xp, z.to(model.dtype()));
  std::vector<PointCloud> out;
  for (std::int64_t k = 0; k < K; ++k) out.push_back(cloud_of(c.pyramid.points.back()[k]));
  return out;
}

std::vector<PointCloud> sample_completions(Model& model, const PointCloud& partial, int K, std::uint64_t seed) {
  if (K < 1) throw ConfigError("sample_completions: K must be at least 1");
  torch::NoGradGuard guard;
  return complete_with_styles(model, partial, model.inference_styles(K, seed));
}

double MetricsReport::mmd_scaled() const { return mmd * metrics::kMmdScale; }
double MetricsReport::tmd_scaled() const { return tmd * metrics::kTmdScale; }
std::optional<double> MetricsReport::uhd_scaled() const {
  if (!uhd) return std::nullopt;
  return *uhd * metrics::kUhdScale;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["protocol"] = nets::to_string(protocol);
  j["K"] = K;
  j["seed"] = seed;
  j["checkpoint_hash"] = checkpoint_hash;
  j["scale"] = {{"mmd", metrics::kMmdScale}, {"tmd", metrics::kTmdScale}, {"uhd", metrics::kUhdScale}};
  j["raw"] = {{"mmd", mmd}, {"tmd", tmd}};
  j["scaled"] = {{"mmd", mmd_scaled()}, {"tmd", tmd_scaled()}};
  if (uhd) {
    j["raw"]["uhd"] = *uhd;
    j["scaled"]["uhd"] = *uhd_scaled();
  } else {
    j["raw"]["uhd"] = nullptr;
    j["scaled"]["uhd"] = nullptr;
  }
  j["per_input"] = nlohmann::json::array();
  for (const auto& p : per_input) {
    nlohmann::json row = {{"id", p.id}, {"tmd", p.tmd}};
    row["uhd"] = p.uhd ? nlohmann::json(*p.uhd) : nlohmann::json(nullptr);
    j["per_input"].push_back(row);
  }
  return j;
}

std::uint64_t pvd_resample_seed(std::uint64_t seed, std::size_t input, std::size_t k) {
  return derive_seed(seed, {0x9d, input, k});
}

MetricsReport evaluate_completions(const std::vector<std::string>& ids, const std::vector<PointCloud>& partials,
                                   const std::vector<std::vector<PointCloud>>& completions,
                                   const std::vector<PointCloud>& test_set, Protocol protocol, std::uint64_t seed) {
  if (partials.empty()) throw SizeError("evaluate: no partial inputs");
  if (ids.size() != partials.size() || completions.size() != partials.size()) {
    throw SizeError("evaluate: ids, partials and completions differ in count");
  }
  MetricsReport r;
  r.protocol = protocol;
  r.seed = seed;
  r.K = static_cast<int>(completions.front().size());
  std::vector<PointCloud> pool;
  double tmd_sum = 0.0;
  double uhd_sum = 0.0;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    const auto& cs = completions[i];
    if (static_cast<int>(cs.size()) != r.K) throw SizeError("evaluate: every input needs K completions");
    InputMetrics m;
    m.id = ids[i];
    if (protocol == Protocol::standard) {
      m.tmd = metrics::tmd(cs);
      m.uhd = metrics::uhd_metric(partials[i], cs);
      uhd_sum += *m.uhd;
      pool.insert(pool.end(), cs.begin(), cs.end());
    } else {
      std::vector<PointCloud> sub;
      for (std::size_t k = 0; k < cs.size(); ++k) {
        sub.push_back(data::resample(cs[k], kPvdPoints, pvd_resample_seed(seed, i, k)));
        std::vector<geometry::Vec3> merged = sub.back().points();
        merged.insert(merged.end(), partials[i].points().begin(), partials[i].points().end());
        pool.emplace_back(std::move(merged));
      }
      m.tmd = metrics::tmd(sub);
    }
    tmd_sum += m.tmd;
    r.per_input.push_back(std::move(m));
  }
  const double n = static_cast<double>(partials.size());
  r.tmd = tmd_sum / n;
  if (protocol == Protocol::standard) r.uhd = uhd_sum / n;
  r.mmd = metrics::mmd(test_set, pool);
  return r;
}

MetricsReport evaluate(Model& model, const std::vector<data::PartialRecord>& partials,
                       const std::vector<PointCloud>& test_set, const EvalOptions& options) {
  if (options.K < 2) throw ConfigError("evaluate: K must be at least 2 for TMD");
  std::vector<std::string> ids;
  std::vector<PointCloud> clouds;
  std::vector<std::vector<PointCloud>> completions;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    ids.push_back(partials[i].id);
    clouds.push_back(partials[i].partial);
    if (options.fixed_style) {
      const Tensor z = options.fixed_style->reshape({1, -1}).expand({options.K, -1}).contiguous();
      completions.push_back(complete_with_styles(model, partials[i].partial, z));
    } else {
      completions.push_back(
          sample_completions(model, partials[i].partial, options.K, derive_seed(options.seed, {0x5c, i})));
    }
  }
  MetricsReport r = evaluate_completions(ids, clouds, completions, test_set, options.protocol, options.seed);
  r.K = options.K;
  return r;
}

}  // namespace mpc::nets
