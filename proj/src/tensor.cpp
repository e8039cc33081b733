#include "mpc/tensor.hpp"

#include <cmath>
#include <set>

#include "mpc/error.hpp"
#include "mpc/rng.hpp"

namespace mpc::nets {

namespace {

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

void check_points(const Tensor& t, const char* what) {
  if (t.dim() != 3 || t.size(2) != 3) throw SizeError(std::string(what) + ": expected [B,N,3] coordinates");
}

// Detached float64 copy of sample b of a [B,N,3] tensor.
geometry::PointCloud sample_cloud(const Tensor& points, std::int64_t b) { return cloud_of(points[b]); }

}  // namespace

ParameterSet::ParameterSet(std::vector<NamedTensor> items) : items_(std::move(items)) {
  std::set<std::string> seen;
  for (const auto& [name, t] : items_) {
    if (!seen.insert(name).second) throw ConfigError("duplicate parameter name '" + name + "'");
  }
}

ParameterSet ParameterSet::of(const torch::nn::Module& module, const std::string& prefix) {
  std::vector<NamedTensor> items;
  for (const auto& p : module.named_parameters(true)) items.emplace_back(prefix + p.key(), p.value());
  return ParameterSet(std::move(items));
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& [name, t] : items_) out.push_back(t);
  return out;
}

std::int64_t ParameterSet::coordinate_count() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : items_) n += t.numel();
  return n;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw ConfigError("no parameter named '" + name + "'");
}

void ParameterSet::append(const ParameterSet& other) {
  std::vector<NamedTensor> merged = items_;
  merged.insert(merged.end(), other.items_.begin(), other.items_.end());
  *this = ParameterSet(std::move(merged));
}

void init_parameters(const ParameterSet& params, std::uint64_t seed) {
  torch::NoGradGuard guard;
  for (const auto& [name, t] : params.items()) {
    Rng rng(derive_seed(seed, {name_hash(name)}));
    std::vector<double> v(static_cast<std::size_t>(t.numel()));
    if (ends_with(name, "affine.bias")) {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (ends_with(name, "bias") || t.dim() < 2) {
      std::fill(v.begin(), v.end(), 0.0);
    } else {
      const double fan_in = static_cast<double>(t.numel() / t.size(0));
      const double bound = std::sqrt(3.0 / fan_in);
      for (double& x : v) x = rng.uniform(-bound, bound);
    }
    auto src = torch::from_blob(v.data(), t.sizes(), torch::kFloat64).to(t.dtype());
    t.copy_(src);
  }
}

GradCheckResult grad_check(const std::function<Tensor()>& f, const ParameterSet& params, double perturbation,
                           std::uint64_t seed, std::size_t probes) {
  if (!(perturbation >= 1e-6 && perturbation <= 1e-3)) {
    throw ConfigError("grad_check: perturbation must lie in [1e-6, 1e-3]");
  }
  const auto tensors = params.tensors();
  auto eval = [&]() {
    const double v = f().item<double>();
    if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
    return v;
  };

  const Tensor value = f();
  const double f0 = value.item<double>();
  if (!std::isfinite(f0)) throw NumericError("grad_check: function value is not finite");
  std::vector<Tensor> grads;
  if (value.requires_grad()) {
    grads = torch::autograd::grad({value}, tensors, {}, false, false, true);
  } else {
    grads.resize(tensors.size());
  }
  GradCheckResult res;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!grads[i].defined()) grads[i] = torch::zeros_like(tensors[i]);
    grads[i] = grads[i].detach().to(torch::kFloat64).reshape({-1}).contiguous();
    norm2 += grads[i].pow(2).sum().item<double>();
  }
  res.gradient_norm = std::sqrt(norm2);

  const std::int64_t total = params.coordinate_count();
  if (total == 0) return res;
  Rng rng(seed);
  const double floor = 1e-6 * std::max(1.0, std::abs(f0));
  for (std::size_t p = 0; p < probes; ++p) {
    std::int64_t flat = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
    std::size_t which = 0;
    while (flat >= tensors[which].numel()) flat -= tensors[which++].numel();
    Tensor view = tensors[which].detach().view({-1});
    double fp = 0.0;
    double fm = 0.0;
    // f may itself need autograd (gradient penalties), so only the writes
    // run without it
    const double orig = view[flat].item<double>();
    auto set = [&](double v) {
      torch::NoGradGuard guard;
      view[flat].fill_(v);
    };
    set(orig + perturbation);
    fp = eval();
    set(orig - perturbation);
    fm = eval();
    set(orig);
    const double fd = (fp - fm) / (2.0 * perturbation);
    const double an = grads[which][flat].item<double>();
    const double abs_err = std::abs(fd - an);
    const double denom = std::max({std::abs(fd), std::abs(an), floor});
    res.max_abs_error = std::max(res.max_abs_error, abs_err);
    res.max_rel_error = std::max(res.max_rel_error, abs_err / denom);
    ++res.probes;
  }
  return res;
}

Tensor points_tensor(const geometry::PointCloud& cloud, torch::Dtype dtype) {
  auto t = torch::empty({static_cast<std::int64_t>(cloud.size()), 3}, torch::kFloat64);
  auto a = t.accessor<double, 2>();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) a[static_cast<std::int64_t>(i)][c] = cloud[i][c];
  }
  return t.to(dtype);
}

Tensor batch_points(const std::vector<geometry::PointCloud>& clouds, torch::Dtype dtype) {
  if (clouds.empty()) throw SizeError("batch_points: empty batch");
  std::vector<Tensor> ts;
  ts.reserve(clouds.size());
  for (const auto& c : clouds) {
    if (c.size() != clouds.front().size()) throw SizeError("batch_points: clouds differ in size");
    ts.push_back(points_tensor(c, dtype));
  }
  return torch::stack(ts);
}

geometry::PointCloud cloud_of(const Tensor& points) {
  if (points.dim() != 2 || points.size(1) != 3) throw SizeError("cloud_of: expected [N,3] coordinates");
  const Tensor t = points.detach().to(torch::kFloat64).contiguous();
  const double* p = t.data_ptr<double>();
  std::vector<geometry::Vec3> out(static_cast<std::size_t>(t.size(0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return geometry::PointCloud(std::move(out));
}

Tensor gather_points(const Tensor& x, const Tensor& idx) {
  const std::int64_t B = x.size(0);
  const std::int64_t N = x.size(1);
  const std::int64_t C = x.size(2);
  if (idx.size(0) != B) throw SizeError("gather_points: batch mismatch");
  auto offset = torch::arange(B, idx.options()).mul(N);
  std::vector<std::int64_t> view(static_cast<std::size_t>(idx.dim()), 1);
  view[0] = B;
  const Tensor flat_idx = (idx + offset.view(view)).reshape({-1});
  auto out_shape = idx.sizes().vec();
  out_shape.push_back(C);
  return x.reshape({B * N, C}).index_select(0, flat_idx).view(out_shape);
}

Tensor knn_index(const Tensor& query, const Tensor& ref, std::int64_t k) {
  check_points(query, "knn_index");
  check_points(ref, "knn_index");
  const std::int64_t B = query.size(0);
  const std::int64_t M = query.size(1);
  if (k > ref.size(1)) {
    throw SizeError("knn_index: k = " + std::to_string(k) + " exceeds " + std::to_string(ref.size(1)) + " points");
  }
  auto out = torch::empty({B, M, k}, torch::kInt64);
  auto* o = out.data_ptr<std::int64_t>();
  for (std::int64_t b = 0; b < B; ++b) {
    const auto nb = geometry::knn(sample_cloud(query, b), sample_cloud(ref, b), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < nb.indices.size(); ++i) o[b * M * k + static_cast<std::int64_t>(i)] = nb.indices[i];
  }
  return out;
}

Tensor downsample_index(const Tensor& points) {
  check_points(points, "downsample_index");
  const std::int64_t B = points.size(0);
  const std::int64_t half = points.size(1) / 2;
  auto out = torch::empty({B, half}, torch::kInt64);
  auto* o = out.data_ptr<std::int64_t>();
  for (std::int64_t b = 0; b < B; ++b) {
    const auto idx = geometry::downsample_half_indices(sample_cloud(points, b));
    for (std::int64_t i = 0; i < half; ++i) o[b * half + i] = static_cast<std::int64_t>(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

Tensor nearest_index(const Tensor& query, const Tensor& ref) {
  const std::int64_t B = query.size(0);
  const std::int64_t M = query.size(1);
  auto out = torch::empty({B, M}, torch::kInt64);
  auto* o = out.data_ptr<std::int64_t>();
  for (std::int64_t b = 0; b < B; ++b) {
    const auto nn = geometry::nearest_indices(sample_cloud(query, b), sample_cloud(ref, b));
    for (std::int64_t i = 0; i < M; ++i) o[b * M + i] = nn[static_cast<std::size_t>(i)];
  }
  return out;
}

// Squared distance from each query point to its nearest ref point, on tape.
Tensor nearest_sq(const Tensor& query, const Tensor& ref) {
  const Tensor matched = gather_points(ref, nearest_index(query, ref));
  return (query - matched).pow(2).sum(-1);
}

// sqrt with a finite derivative at zero.
Tensor safe_sqrt(const Tensor& x) { return torch::where(x > 0, x.clamp_min(1e-30).sqrt(), torch::zeros_like(x)); }

}  // namespace

Tensor nearest_sq_distance(const Tensor& query, const Tensor& ref) {
  torch::NoGradGuard guard;
  check_points(query, "nearest_sq_distance");
  check_points(ref, "nearest_sq_distance");
  return nearest_sq(query.detach(), ref.detach());
}

Tensor chamfer(const Tensor& a, const Tensor& b) {
  check_points(a, "chamfer");
  check_points(b, "chamfer");
  return nearest_sq(a, b).mean(1) + nearest_sq(b, a).mean(1);
}

Tensor uhd(const Tensor& a, const Tensor& b) {
  check_points(a, "uhd");
  check_points(b, "uhd");
  return std::get<0>(safe_sqrt(nearest_sq(a, b)).max(1));
}

Tensor emd(const Tensor& a, const Tensor& b) {
  check_points(a, "emd");
  check_points(b, "emd");
  if (a.size(1) != b.size(1)) throw SizeError("emd: clouds differ in size");
  const std::int64_t B = a.size(0);
  const std::int64_t N = a.size(1);
  auto match = torch::empty({B, N}, torch::kInt64);
  auto* m = match.data_ptr<std::int64_t>();
  for (std::int64_t s = 0; s < B; ++s) {
    const auto r = geometry::emd_match(sample_cloud(a, s), sample_cloud(b, s));
    for (std::int64_t i = 0; i < N; ++i) m[s * N + i] = r.match[static_cast<std::size_t>(i)];
  }
  return safe_sqrt((a - gather_points(b, match)).pow(2).sum(-1)).mean(1);
}

}  // namespace mpc::nets
