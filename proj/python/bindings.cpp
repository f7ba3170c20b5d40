// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "faa/cli.hpp"
#include "faa/datagen.hpp"
#include "faa/error.hpp"
#include "faa/eval.hpp"
#include "faa/fedauth.hpp"

namespace py = pybind11;
using namespace faa;

namespace {

py::tuple dataset_tuple(const data::LabeledDataset& d) {
  return py::make_tuple(d.x, py::array_t<int>(static_cast<py::ssize_t>(d.y.size()), d.y.data()));
}

experiment::ExperimentConfig config_from_text(const std::string& text, const std::vector<std::string>& overrides) {
  const auto parsed = cli::parse_config_text(text, overrides);
  if (!parsed.ok()) {
    std::string msg = "invalid config:";
    for (const auto& d : parsed.diagnostics) msg += "\n  " + d.str();
    throw ConfigError(msg);
  }
  return *parsed.config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated active authentication simulator";
  m.attr("__version__") = std::string(cli::kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<PartitionError>(m, "PartitionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "gen_population",
      [](int users, int dim, int samples_per_user, double separation, double within_scale, std::uint64_t seed) {
        return dataset_tuple(data::gen_population({users, dim, samples_per_user, separation, within_scale, seed}));
      },
      py::arg("users"), py::arg("dim"), py::arg("samples_per_user"), py::arg("separation"),
      py::arg("within_scale") = 1.0, py::arg("seed") = 0, "Returns (features, labels).");

  m.def("compute_qiid", [](const std::vector<int>& users_per_device, int num_users) {
    return data::compute_qiid(users_per_device, num_users);
  });

  m.def(
      "partition_by_qiid",
      [](const Matrix& x, const std::vector<int>& y, int num_users, std::size_t devices, double target) {
        const data::LabeledDataset d{x, y, num_users};
        const auto p = data::partition_by_qiid(d, devices, target);
        return py::make_tuple(p.device_indices, p.measured_qiid);
      },
      py::arg("x"), py::arg("y"), py::arg("num_users"), py::arg("devices"), py::arg("target_qiid"),
      "Returns (row indices per device, measured qIID).");

  m.def(
      "impression",
      [](const Matrix& features, bool diagonal) {
        const auto imp = fedauth::impression_from_features(features, 0, diagonal);
        return py::make_tuple(imp.mu, imp.sigma);
      },
      py::arg("features"), py::arg("diagonal") = false, "Feature mean and covariance (1/n).");

  m.def(
      "chol_psd",
      [](const Matrix& sigma, double eps) {
        const auto c = fedauth::chol_psd(sigma, eps);
        return py::make_tuple(Matrix(c.lower), c.jitter);
      },
      py::arg("sigma"), py::arg("eps") = 1e-6, "Returns (lower factor, jitter added).");

  m.def(
      "sample_features",
      [](const Vector& mu, const Matrix& sigma, std::size_t count, std::uint64_t seed, double eps) {
        Rng rng(seed);
        // Any positive sample count; the sampler only reads mu and sigma.
        const UserImpression imp{0, 1, mu, sigma, false};
        return Matrix(fedauth::sample_user_features(imp, count, rng, eps).features);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("count"), py::arg("seed") = 0, py::arg("eps") = 1e-6);

  m.def(
      "best_ada",
      [](const std::vector<double>& genuine, const std::vector<double>& impostor) {
        const auto d = eval::best_ada({0, genuine, impostor});
        return py::dict(py::arg("threshold") = d.threshold, py::arg("ada") = d.ada, py::arg("tpr") = d.tpr,
                        py::arg("tnr") = d.tnr);
      },
      py::arg("genuine"), py::arg("impostor"));

  m.def(
      "validate_config",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        std::vector<py::dict> out;
        for (const auto& d : cli::parse_config_text(text, overrides).diagnostics)
          out.push_back(py::dict(py::arg("severity") = d.severity == cli::Diagnostic::Severity::error ? "error" : "warning",
                                 py::arg("path") = d.path, py::arg("message") = d.message));
        return out;
      },
      py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
      "Diagnostics for a JSON config document; empty when clean.");

  m.def(
      "run_experiment",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        const auto cfg = config_from_text(text, overrides);
        std::ostringstream log;
        std::string report;
        {
          py::gil_scoped_release release;
          report = cli::run_experiment(cfg, log).dump();
        }
        return report;
      },
      py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
      "Runs an experiment, writes its artifacts to output_dir and returns report.json as text.");
}
