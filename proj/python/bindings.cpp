#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "mpc/checkpoint.hpp"
#include "mpc/container.hpp"
#include "mpc/data.hpp"
#include "mpc/error.hpp"
#include "mpc/evaluation.hpp"
#include "mpc/geometry.hpp"
#include "mpc/metrics.hpp"
#include "mpc/style.hpp"

namespace py = pybind11;
using namespace mpc;
using geometry::PointCloud;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw SizeError("expected an (N, 3) array");
  const double* p = a.data();
  std::vector<geometry::Vec3> pts(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return PointCloud(std::move(pts));
}

Array to_array(const PointCloud& c) {
  Array a({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
  double* p = a.mutable_data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) p[3 * i + k] = c[i][k];
  }
  return a;
}

std::vector<PointCloud> to_clouds(const std::vector<Array>& v) {
  std::vector<PointCloud> out;
  for (const auto& a : v) out.push_back(to_cloud(a));
  return out;
}

py::dict shape_dict(const data::ShapeRecord& s) {
  py::dict d;
  d["id"] = s.id;
  d["family"] = s.family;
  d["points"] = to_array(s.complete);
  d["labels"] = s.part_labels;
  d["factors"] = s.latent_factors;
  return d;
}

py::dict record_dict(const container::Record& r) {
  py::dict d;
  d["id"] = r.id;
  py::array_t<float> xyz({static_cast<py::ssize_t>(r.point_count()), py::ssize_t{3}});
  std::copy(r.xyz.begin(), r.xyz.end(), xyz.mutable_data());
  d["points"] = xyz;
  d["labels"] = r.labels ? py::cast(*r.labels) : py::none();
  d["factors"] = r.factors ? py::cast(*r.factors) : py::none();
  return d;
}

container::Record dict_record(const py::dict& d) {
  container::Record r;
  r.id = d["id"].cast<std::string>();
  const auto pts = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(d["points"]);
  if (!pts || (pts.size() > 0 && (pts.ndim() != 2 || pts.shape(1) != 3))) throw SizeError("points must be (N, 3)");
  r.xyz.assign(pts.data(), pts.data() + pts.size());
  if (d.contains("labels") && !d["labels"].is_none()) r.labels = d["labels"].cast<std::vector<std::uint16_t>>();
  if (d.contains("factors") && !d["factors"].is_none()) r.factors = d["factors"].cast<std::vector<float>>();
  return r;
}

class Completer {
 public:
  explicit Completer(const std::filesystem::path& checkpoint)
      : model_(nets::load_model(cli::resolve_checkpoint(checkpoint))) {
    model_->train(false);
  }

  std::vector<Array> complete(const Array& partial, int K, std::uint64_t seed) {
    PointCloud p = to_cloud(partial);
    const auto n = static_cast<std::size_t>(model_->config().partial_points);
    if (p.size() != n) p = data::resample(p, n, seed);
    std::vector<Array> out;
    py::gil_scoped_release release;
    const auto cs = nets::sample_completions(*model_, p, K, seed);
    py::gil_scoped_acquire acquire;
    for (const auto& c : cs) out.push_back(to_array(c));
    return out;
  }

  int partial_points() const { return model_->config().partial_points; }
  int complete_points() const { return model_->config().complete_points; }

 private:
  std::unique_ptr<nets::Model> model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = cli::kToolVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<PartializationError>(m, "PartializationError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("chamfer", [](const Array& p, const Array& q) { return geometry::chamfer(to_cloud(p), to_cloud(q)); },
        "Mean squared nearest-neighbour distance, both directions summed.");
  m.def("uhd", [](const Array& p, const Array& q) { return geometry::uhd(to_cloud(p), to_cloud(q)); },
        "Largest distance from a point of p to q.");
  m.def("emd", [](const Array& p, const Array& q) { return geometry::emd(to_cloud(p), to_cloud(q)); },
        "Mean matched distance under the optimal bijection.");
  m.def("mmd",
        [](const std::vector<Array>& test_set, const std::vector<Array>& completions) {
          const auto t = to_clouds(test_set), c = to_clouds(completions);
          return metrics::mmd(t, c);
        });
  m.def("tmd", [](const std::vector<Array>& completions) {
    const auto c = to_clouds(completions);
    return metrics::tmd(c);
  });
  m.def("uhd_metric", [](const Array& partial, const std::vector<Array>& completions) {
    const auto c = to_clouds(completions);
    return metrics::uhd_metric(to_cloud(partial), c);
  });

  m.def("families", &data::families);
  m.def("generate_shape", [](const std::string& family, std::uint64_t seed) {
    return shape_dict(data::generate_shape(family, seed));
  });
  m.def(
      "partialize",
      [](const std::string& family, std::uint64_t shape_seed, const std::string& method, std::uint64_t seed) {
        const data::ShapeRecord s = data::generate_shape(family, shape_seed);
        const data::PartialRecord p = data::partial_method_from_string(method) == data::PartialMethod::view_cull
                                          ? data::partialize_view(s, data::random_viewpoint(seed), seed)
                                          : data::partialize_parts(s, seed);
        py::dict d;
        d["id"] = p.id;
        d["source_id"] = p.source_id;
        d["points"] = to_array(p.partial);
        d["method"] = data::to_string(p.method);
        d["params"] = p.method_params;
        d["complete"] = shape_dict(s);
        return d;
      },
      py::arg("family"), py::arg("shape_seed"), py::arg("method") = "view_cull", py::arg("seed") = 0);

  m.def("read_container", [](const std::filesystem::path& path) {
    py::list out;
    for (const auto& r : container::read_file(path)) out.append(record_dict(r));
    return out;
  });
  m.def("write_container", [](const std::filesystem::path& path, const py::list& records) {
    std::vector<container::Record> recs;
    for (const auto& r : records) recs.push_back(dict_record(r.cast<py::dict>()));
    container::write_file(path, recs);
  });

  m.def("kl_standard_normal", [](const std::vector<double>& mu, const std::vector<double>& sigma) {
    if (mu.size() != sigma.size() || mu.empty()) throw SizeError("mu and sigma need the same non-zero length");
    const auto n = static_cast<std::int64_t>(mu.size());
    const nets::Tensor m = torch::tensor(mu, torch::kFloat64).view({1, n});
    const nets::Tensor s = torch::tensor(sigma, torch::kFloat64).view({1, n});
    return nets::kl_to_standard_normal({m, s}).item<double>();
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "Runs one `mpc` command; returns (exit code, stdout, stderr).");

  py::class_<Completer>(m, "Completer")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def("complete", &Completer::complete, py::arg("partial"), py::arg("K") = 10, py::arg("seed") = 0)
      .def_property_readonly("partial_points", &Completer::partial_points)
      .def_property_readonly("complete_points", &Completer::complete_points);
}
