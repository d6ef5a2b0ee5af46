#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "mshf/error.hpp"
#include "mshf/evaluation.hpp"
#include "mshf/hypergraph.hpp"
#include "mshf/pipeline.hpp"
#include "mshf/scale.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

mshf::DataSet to_dataset(const Array& points) {
  if (points.ndim() != 2) throw mshf::Error(mshf::ErrorCode::kInvalidArgument, "points must be a 2-D array");
  const auto* p = points.data();
  return mshf::DataSet(static_cast<int>(points.shape(1)), std::vector<double>(p, p + points.size()));
}

py::array_t<double> to_array(const mshf::DataSet& data) {
  py::array_t<double> out({static_cast<py::ssize_t>(data.size()), static_cast<py::ssize_t>(data.dim())});
  std::copy(data.coords().begin(), data.coords().end(), out.mutable_data());
  return out;
}

py::dict params_dict(const mshf::ModelParams& p) {
  py::dict d;
  d["kind"] = std::string(mshf::to_string(p.kind));
  d["values"] = p.values;
  return d;
}

// Keyword options are RunConfig keys; values go through their text form so
// validation matches config files and the command line.
py::dict fit(const Array& points, const std::string& kind, const py::kwargs& options) {
  mshf::RunConfig cfg;
  cfg.set("kind", kind);
  for (const auto& [key, value] : options) cfg.set(py::str(key), py::str(value));
  const mshf::DataSet data = to_dataset(points);
  mshf::FitResult result;
  {
    py::gil_scoped_release release;
    result = mshf::fit(data, cfg);
  }

  py::list modes;
  for (const auto& m : result.modes) {
    py::dict d;
    d["params"] = params_dict(m.params);
    d["hypothesis_index"] = m.hypothesis_index;
    d["scale"] = m.scale;
    d["weight"] = m.weight;
    d["mtd"] = m.mtd;
    d["inliers"] = std::vector<std::size_t>(m.inliers.begin(), m.inliers.end());
    modes.append(d);
  }
  py::list graph;
  for (const auto& row : result.decision_graph) {
    py::dict d;
    d["vertex_index"] = row.hypothesis_index;
    d["weight"] = row.weight;
    d["mtd"] = row.mtd ? py::object(py::float_(*row.mtd)) : py::object(py::none());
    d["retained"] = row.retained;
    d["mode"] = row.mode;
    graph.append(d);
  }
  py::dict config;
  for (const auto& [key, value] : result.config.materialized()) config[py::str(key)] = value;

  py::dict out;
  out["labels"] = py::array_t<int>(static_cast<py::ssize_t>(result.labels.size()), result.labels.data());
  out["modes"] = modes;
  out["decision_graph"] = graph;
  out["config"] = config;
  out["vertex_count"] = result.vertex_count;
  out["retained_count"] = result.retained_count;
  return out;
}

py::dict generate_scene(const std::string& name, std::uint64_t seed) {
  const auto scene = mshf::generate_scene(mshf::parse_scene_spec(name), seed);
  py::list params;
  for (const auto& p : scene.true_params) params.append(params_dict(p));
  py::dict out;
  out["points"] = to_array(scene.data);
  out["labels"] = py::array_t<int>(static_cast<py::ssize_t>(scene.true_labels.size()), scene.true_labels.data());
  out["kind"] = std::string(mshf::to_string(scene.kind));
  out["true_params"] = params;
  out["inlier_sigma"] = scene.inlier_sigma;
  return out;
}

}  // namespace

PYBIND11_MODULE(_mshf, m) {
  m.doc() = "Multi-structure geometric model fitting by mode seeking on hypergraphs";

  static py::exception<mshf::Error> error(m, "MshfError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const mshf::Error& e) {
      const std::string message = std::string(mshf::to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), message.c_str());
    }
  });

  m.def("fit", &fit, py::arg("points"), py::arg("kind") = "line2d",
        "Fit every structure in an (n, d) array. Keyword options are config keys such as "
        "variant, epsilon, hypothesis_count, k_fraction, rng_seed.");
  m.def("generate_scene", &generate_scene, py::arg("template"), py::arg("seed") = 0,
        "Synthetic labeled scene from a template name such as '3-lines-3d' or 'unbalanced-3-lines:8'.");
  m.def("standard_templates", &mshf::standard_templates);
  m.def(
      "fitting_error",
      [](const std::vector<int>& estimated, const std::vector<int>& truth) {
        return mshf::fitting_error(estimated, truth);
      },
      py::arg("estimated"), py::arg("truth"), "Mislabeling percentage after optimal label matching.");
  m.def("ikose_scale",
        [](const std::vector<double>& residuals, double k_fraction) {
          mshf::ScaleConfig cfg;
          cfg.k_fraction = k_fraction;
          return mshf::ikose_scale(residuals, cfg).scale;
        },
        py::arg("residuals"), py::arg("k_fraction") = 0.1);
  m.def("epanechnikov_bandwidth", &mshf::epanechnikov_bandwidth, py::arg("scale"), py::arg("n"));
}
