#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bpre/config.hpp"
#include "bpre/distances.hpp"
#include "bpre/models.hpp"
#include "bpre/report_io.hpp"
#include "bpre/simulate.hpp"
#include "bpre/theorems.hpp"

namespace py = pybind11;
using namespace bpre;

namespace {

Family family_from(const std::string& name) {
  const auto f = parse_family(name);
  if (!f) throw InvalidArgument("unknown family '" + name + "'");
  return *f;
}

EmpiricalSample sample_from(std::vector<double> xs) { return EmpiricalSample(std::move(xs)); }

py::dict estimate_dict(const DistanceEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["order"] = e.order;
  d["method"] = std::string(method_name(e.method));
  d["exact"] = e.exact;
  if (e.recentering) d["recentering"] = py::make_tuple(e.recentering->first, e.recentering->second);
  return d;
}

std::string run_report(const RunConfig& cfg, const std::string& experiment) {
  const ExperimentConfig ex = cfg.experiment_config();
  nlohmann::json body;
  if (experiment == "lln") {
    body = to_json(run_lln(ex));
  } else if (experiment == "lil") {
    body = to_json(run_lil(ex));
  } else if (experiment == "invariance") {
    body = to_json(run_invariance(ex, cfg.experiment.tolerance));
  } else if (experiment == "clt-rate") {
    body = to_json(run_clt_rate(ex));
  } else if (experiment == "moments") {
    body = to_json(run_logw_moments(ex, cfg.experiment.q));
  } else if (experiment == "laplace") {
    body = to_json(run_laplace_tail(ex, cfg.experiment.t_grid));
  } else {
    throw InvalidArgument("unknown experiment '" + experiment + "'");
  }
  return body.dump();
}

}  // namespace

PYBIND11_MODULE(_bpre, m) {
  m.doc() = "Branching processes in random environment: simulation, distances and experiments";
  m.attr("__version__") = BPRE_VERSION;

  // Kept alive for the interpreter's lifetime.
  static PyObject* base = py::exception<Error>(m, "BpreError", PyExc_RuntimeError).inc_ref().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(base)(e.what());
      err.attr("exit_code") = e.exit_code();
      PyErr_SetObject(base, err.ptr());
    }
  });

  py::class_<EnvironmentSpec>(m, "EnvironmentSpec")
      .def_property_readonly("family", [](const EnvironmentSpec& s) { return std::string(family_name(s.family)); })
      .def_property_readonly("kind", [](const EnvironmentSpec& s) {
        return s.support == EnvironmentSpec::Support::Finite ? "finite" : "interval";
      })
      .def_readonly("parameters", &EnvironmentSpec::parameters)
      .def_readonly("probabilities", &EnvironmentSpec::probabilities)
      .def_readonly("k", &EnvironmentSpec::two_point_k)
      .def("__eq__", [](const EnvironmentSpec& a, const EnvironmentSpec& b) { return a == b; })
      .def("__repr__", [](const EnvironmentSpec& s) {
        return "<EnvironmentSpec " + std::string(family_name(s.family)) + ">";
      });

  m.def("reference_environment", &reference_environment);
  m.def("doubling_environment", &doubling_environment);
  m.def(
      "finite_environment",
      [](const std::string& family, std::vector<double> parameters, std::vector<double> probabilities,
         std::uint64_t k) {
        auto spec = finite_environment(family_from(family), std::move(parameters), std::move(probabilities), k);
        spec.validate();
        return spec;
      },
      py::arg("family"), py::arg("parameters"), py::arg("probabilities"), py::arg("k") = 2);
  m.def(
      "interval_environment",
      [](const std::string& family, double lo, double hi, std::uint64_t k) {
        auto spec = interval_environment(family_from(family), lo, hi, k);
        spec.validate();
        return spec;
      },
      py::arg("family"), py::arg("lo"), py::arg("hi"), py::arg("k") = 2);

  m.def(
      "model_moments",
      [](const EnvironmentSpec& spec, double delta) {
        const auto mm = compute_model_moments(spec, delta);
        py::dict d;
        d["mu"] = mm.mu;
        d["sigma2"] = mm.sigma2;
        d["sigma"] = mm.sigma();
        d["abs_moment_2_delta"] = mm.abs_moment_2_delta;
        d["delta"] = mm.delta;
        return d;
      },
      py::arg("spec"), py::arg("delta") = 0.9);
  m.def(
      "validate_conditions",
      [](const EnvironmentSpec& spec, double delta, double p, double c) {
        return to_json(validate_conditions(spec, delta, p, c)).dump();
      },
      py::arg("spec"), py::arg("delta") = 0.9, py::arg("p") = 2.0, py::arg("c") = 1.0);

  m.def("derive_path_seed", [](std::uint64_t master, std::uint64_t index) {
    return derive_path_seed(master, index).value;
  });
  m.def(
      "simulate_path",
      [](const EnvironmentSpec& spec, std::uint64_t horizon, std::uint64_t seed, std::uint64_t path_index,
         std::uint64_t exact_threshold, std::vector<std::uint64_t> record_schedule) {
        SimConfig cfg{horizon, exact_threshold, seed, std::move(record_schedule)};
        py::list out;
        for (const auto& r : simulate_path(spec, cfg, path_index)) {
          py::dict d;
          d["n"] = r.n;
          d["z_exact"] = r.z_exact ? py::cast(*r.z_exact) : py::none();
          d["log_z"] = r.log_z;
          d["s"] = r.s;
          d["log_w"] = r.log_w;
          d["regime"] = regime_name(r.regime);
          out.append(d);
        }
        return out;
      },
      py::arg("spec"), py::arg("horizon"), py::arg("seed") = 0, py::arg("path_index") = 0,
      py::arg("exact_threshold") = kDefaultExactThreshold, py::arg("record_schedule") = std::vector<std::uint64_t>{});

  m.def(
      "wasserstein",
      [](std::vector<double> a, std::vector<double> b, double r) {
        return estimate_dict(wasserstein(sample_from(std::move(a)), sample_from(std::move(b)), r,
                                         SizeMismatch::Interpolate));
      },
      py::arg("a"), py::arg("b"), py::arg("r") = 1.0);
  m.def("zolotarev_1", [](std::vector<double> a, std::vector<double> b) {
    return estimate_dict(zolotarev_1(sample_from(std::move(a)), sample_from(std::move(b))));
  });
  m.def(
      "zolotarev_2",
      [](std::vector<double> a, std::vector<double> b, bool recenter) {
        return estimate_dict(zolotarev_2_equal_mean(sample_from(std::move(a)), sample_from(std::move(b)), recenter));
      },
      py::arg("a"), py::arg("b"), py::arg("recenter") = true);
  m.def("ks_statistic", [](std::vector<double> a) { return ks_statistic(sample_from(std::move(a))); });
  m.def("assignment_oracle", [](std::vector<double> a, std::vector<double> b, double r) {
    return assignment_oracle(sample_from(std::move(a)), sample_from(std::move(b)), r);
  });
  m.def("discretize_normal", [](std::size_t n) {
    const auto s = discretize_normal(n);
    return std::vector<double>(s.values().begin(), s.values().end());
  });

  m.def(
      "canonical_config",
      [](const std::string& text, const std::string& syntax) {
        const auto cfg = parse_config_string(text, syntax == "json" ? ConfigSyntax::Json : ConfigSyntax::Toml);
        return to_toml(cfg);
      },
      py::arg("text"), py::arg("syntax") = "toml");
  m.def(
      "run_experiment_json",
      [](const std::string& text, const std::string& syntax, const std::string& experiment) {
        const auto cfg = parse_config_string(text, syntax == "json" ? ConfigSyntax::Json : ConfigSyntax::Toml);
        py::gil_scoped_release release;
        return run_report(cfg, experiment);
      },
      py::arg("text"), py::arg("syntax"), py::arg("experiment"));
}
