#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brand/error.hpp"
#include "brand/functional.hpp"
#include "brand/pipeline.hpp"
#include "brand/postprocess.hpp"
#include "brand/robust_prior.hpp"
#include "brand/simulation.hpp"

namespace py = pybind11;
using namespace brand;

namespace {

pipeline::RunConfig make_config(const py::dict& settings) {
  pipeline::RunConfig cfg;
  io::KeyValues values;
  for (const auto& [key, value] : settings) values[py::str(key)] = py::str(value);
  cfg.apply(values);
  return cfg;
}

py::dict summary_dict(const PosteriorSummary& s, const ChainOutput& chain) {
  py::dict d;
  d["labels"] = s.labels;
  d["ppn"] = s.ppn;
  d["novelty_units"] = s.ppcm.units;
  d["ppcm"] = s.ppcm.probability;
  d["best_partition"] = s.best_partition;
  d["anomaly"] = s.anomaly_flags;
  d["min_size"] = s.min_size;
  if (s.metrics) {
    d["metrics"] = py::dict(py::arg("ari") = s.metrics->ari, py::arg("novelty_precision") = s.metrics->novelty_precision,
                            py::arg("known_accuracy") = s.metrics->known_accuracy);
  }
  d["gamma_trace"] = chain.gamma_trace;
  d["n_active_trace"] = chain.n_active_trace;
  return d;
}

py::dict robust_dict(const RobustClassSummary& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["scatter"] = r.scatter;
  d["untrimmed"] = r.untrimmed;
  d["method"] = to_string(r.method);
  d["rho"] = r.rho;
  d["consistency"] = r.consistency;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust Bayesian novelty detection: Stage I robust priors, Stage II slice sampler, post-processing.";

  static py::exception<Error> error_type(m, "BrandError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def("consistency_factor", &consistency_factor, py::arg("eta"), py::arg("p"));

  m.def(
      "extract_class_priors",
      [](const Matrix& data, const std::vector<int>& labels, const py::dict& settings) {
        const auto cfg = make_config(settings);
        py::list out;
        for (const auto& r : pipeline::extract_priors(LabeledDataset{data, labels}, cfg)) out.append(robust_dict(r));
        return out;
      },
      py::arg("data"), py::arg("labels"), py::arg("settings") = py::dict());

  m.def(
      "fit",
      [](const Matrix& train, const std::vector<int>& labels, const Matrix& test, const py::dict& settings,
         std::optional<std::vector<int>> truth) {
        const auto cfg = make_config(settings);
        pipeline::FitResult r;
        {
          py::gil_scoped_release release;
          r = pipeline::fit(LabeledDataset{train, labels}, TestDataset{test}, cfg, truth ? &*truth : nullptr);
        }
        return summary_dict(r.summary, r.chain);
      },
      py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("settings") = py::dict(), py::arg("truth") = py::none());

  m.def(
      "fit_functional",
      [](const Vector& grid, const Matrix& train, const std::vector<int>& labels, const Matrix& test,
         const py::dict& settings, std::optional<std::vector<int>> truth) {
        const auto cfg = make_config(settings);
        pipeline::FunctionalFitResult r;
        {
          py::gil_scoped_release release;
          r = pipeline::fit_functional(functional::CurveSet{grid, train, labels}, functional::CurveSet{grid, test, {}}, cfg,
                                       truth ? &*truth : nullptr);
        }
        py::dict d = summary_dict(r.summary, r.chain);
        d["label_means"] = r.label_means;
        return d;
      },
      py::arg("grid"), py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("settings") = py::dict(),
      py::arg("truth") = py::none());

  m.def(
      "simulate",
      [](const std::string& scenario, std::uint64_t seed) {
        Rng rng(pipeline::stream_seed(seed, pipeline::SeedStream::Simulation));
        const auto data = sim::generate_simulation(sim::scenario(scenario), rng);
        return py::make_tuple(data.train.data, data.train.labels, data.test.data, data.truth);
      },
      py::arg("scenario") = "notsmall-noise", py::arg("seed") = 1);

  m.def(
      "bspline_basis",
      [](const Vector& grid, int n_basis, int order) { return functional::bspline_basis({n_basis, order, {}, {}}, grid); },
      py::arg("grid"), py::arg("n_basis"), py::arg("order") = 4);

  m.def("ari", &ari, py::arg("a"), py::arg("b"));
  m.def("vi_score", &vi_score, py::arg("ppcm"), py::arg("partition"));
  m.def(
      "best_partition_vi",
      [](const Matrix& ppcm, const std::vector<Partition>& candidates) { return candidates[best_partition_vi(ppcm, candidates)]; },
      py::arg("ppcm"), py::arg("candidates"));
}
