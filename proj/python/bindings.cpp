#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "edm/baselines.hpp"
#include "edm/cli.hpp"
#include "edm/data.hpp"
#include "edm/fit.hpp"
#include "edm/gof.hpp"
#include "edm/lagrange.hpp"
#include "edm/model.hpp"

namespace py = pybind11;
using namespace edm;

namespace {

py::dict stats_dict(const DescriptiveStats& d) {
  py::dict out;
  out["n_obs"] = d.n_obs;
  out["mean"] = d.mean;
  out["variance"] = d.variance;
  out["skewness"] = d.skewness;
  out["kurtosis"] = d.kurtosis;
  out["fraction_zeros"] = d.fraction_zeros;
  out["dispersion_index"] = d.dispersion_index;
  return out;
}

FrequencyTable table_from_pairs(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
  std::vector<FrequencyCell> cells;
  for (const auto& [v, c] : pairs) cells.push_back({v, c});
  return FrequencyTable(std::move(cells));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ABM and LM exponential dispersion models for count data";

  // Messages start with the error code name, e.g. "MeanOutOfDomain: ...".
  py::register_exception<Error>(m, "EdmError", PyExc_RuntimeError);

  py::enum_<Family>(m, "Family").value("ABM", Family::ABM).value("LM", Family::LM);

  py::enum_<BaselineModel>(m, "Baseline")
      .value("POISSON", BaselineModel::Poisson)
      .value("NB", BaselineModel::NB)
      .value("PIG", BaselineModel::PIG)
      .value("DLD", BaselineModel::DLD)
      .value("NLD", BaselineModel::NLD)
      .value("PLB", BaselineModel::PLB)
      .value("GDP", BaselineModel::GDP)
      .value("BTD", BaselineModel::BTD);

  py::enum_<MeasureAlgorithm>(m, "MeasureAlgorithm")
      .value("RECURRENCE", MeasureAlgorithm::Recurrence)
      .value("LAGRANGE", MeasureAlgorithm::Lagrange);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<Family, int, double>(), py::arg("family"), py::arg("r"), py::arg("p"))
      .def_property_readonly("family", &ModelSpec::family)
      .def_property_readonly("r", &ModelSpec::r)
      .def_property_readonly("p", &ModelSpec::p)
      .def("label", &ModelSpec::label)
      .def("__repr__", [](const ModelSpec& s) {
        std::ostringstream os;
        os << "ModelSpec(" << s.label() << ", p=" << s.p() << ")";
        return os.str();
      });

  m.def("mean_domain", [](const ModelSpec& s) {
    const auto d = mean_domain(s);
    return std::make_pair(d.lower, d.upper);
  });
  m.def("variance", &variance, py::arg("spec"), py::arg("m"));
  m.def("psi", &psi, py::arg("spec"), py::arg("m"));
  m.def("phi", &phi, py::arg("spec"), py::arg("m"));
  m.def("g_func", &g_func, py::arg("spec"), py::arg("m"));
  m.def("zero_prob", &zero_prob, py::arg("spec"), py::arg("m"));
  m.def("cumulant", &cumulant, py::arg("spec"), py::arg("m"), py::arg("j"));
  m.def("skewness", &skewness, py::arg("spec"), py::arg("m"));
  m.def("excess_kurtosis", &excess_kurtosis, py::arg("spec"), py::arg("m"));
  m.def(
      "pmf",
      [](const ModelSpec& s, double mean, std::optional<std::size_t> n_max) {
        return n_max ? pmf(s, mean, *n_max).probabilities()
                     : pmf_adaptive(s, mean).probabilities();
      },
      py::arg("spec"), py::arg("m"), py::arg("n_max") = py::none(),
      "Probabilities over 0..n_max; adaptive truncation when n_max is None.");
  m.def(
      "log_measure",
      [](const ModelSpec& s, std::size_t n_max, MeasureAlgorithm algorithm) {
        return generating_measure(s, n_max, algorithm).log_scaled;
      },
      py::arg("spec"), py::arg("n_max"), py::arg("algorithm") = MeasureAlgorithm::Recurrence,
      "log(mu*_n / p^n) for n = 0..n_max.");
  m.def("total_mass", &total_mass, py::arg("spec"), py::arg("n_max"));

  m.def("nu_measure", [](int r, std::size_t n_max) { return nu_measure(r, n_max).values; },
        py::arg("r"), py::arg("n_max"));
  m.def("hermite_nu", &hermite_nu, py::arg("n"));
  m.def(
      "conv_exponential",
      [](int r, double p, std::size_t n_max) {
        return conv_exponential(nu_measure(r, n_max), p, n_max);
      },
      py::arg("r"), py::arg("p"), py::arg("n_max"));

  m.def(
      "baseline_pmf",
      [](BaselineModel model, std::vector<double> params, std::size_t n_max) {
        return baseline_pmf(BaselineSpec(model, std::move(params)), n_max);
      },
      py::arg("model"), py::arg("params"), py::arg("n_max"));

  py::class_<FrequencyTable>(m, "FrequencyTable")
      .def(py::init(&table_from_pairs), py::arg("cells"),
           "From (value, count) pairs in any order.")
      .def_static("read_csv", &read_frequency_csv, py::arg("path"))
      .def_static("parse_csv", [](const std::string& text) { return parse_frequency_csv(text); },
                  py::arg("text"))
      .def_property_readonly("total", &FrequencyTable::total)
      .def_property_readonly("max_value", &FrequencyTable::max_value)
      .def("cells",
           [](const FrequencyTable& t) {
             std::vector<std::pair<std::int64_t, std::int64_t>> out;
             for (const auto& c : t.cells()) out.emplace_back(c.value, c.count);
             return out;
           })
      .def("count_at", &FrequencyTable::count_at)
      .def("mean", [](const FrequencyTable& t) { return sample_mean(t); })
      .def("variance", [](const FrequencyTable& t) { return sample_variance(t); })
      .def("describe", [](const FrequencyTable& t) { return stats_dict(descriptive(t)); });

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("label", &FitResult::label)
      .def_readonly("m_hat", &FitResult::m_hat)
      .def_readonly("log_likelihood", &FitResult::log_likelihood)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("n_params", &FitResult::n_params)
      .def_property_readonly("params",
                             [](const FitResult& f) {
                               if (const auto* s = std::get_if<ModelSpec>(&f.spec)) {
                                 return std::vector<double>{s->p()};
                               }
                               return std::get<BaselineSpec>(f.spec).params();
                             })
      .def("probabilities", &FitResult::probabilities, py::arg("n_max"));

  m.def(
      "fit_mle", [](Family family, int r, const FrequencyTable& data) { return fit_mle(family, r, data); },
      py::arg("family"), py::arg("r"), py::arg("data"));
  m.def("fit_moments", &fit_moments, py::arg("family"), py::arg("r"), py::arg("data"));
  m.def(
      "fit_baseline",
      [](BaselineModel model, const FrequencyTable& data) { return fit_baseline(model, data); },
      py::arg("model"), py::arg("data"));

  py::class_<GofReport>(m, "GofReport")
      .def_readonly("chi2", &GofReport::chi2)
      .def_readonly("df", &GofReport::df)
      .def_readonly("p_value", &GofReport::p_value)
      .def_readonly("rmse", &GofReport::rmse)
      .def_readonly("kl", &GofReport::kl)
      .def_property_readonly("cells", [](const GofReport& g) {
        std::vector<std::tuple<std::string, double, double>> out;
        for (const auto& c : g.pooled_cells) out.emplace_back(c.label(), c.observed, c.expected);
        return out;
      });

  m.def("evaluate_gof", &evaluate_gof, py::arg("data"), py::arg("probs"), py::arg("n_params"),
        py::arg("min_expected") = 1.0);
  m.def(
      "goodness_of_fit",
      [](const FitResult& f, const FrequencyTable& data, double min_expected) {
        return evaluate_gof(data, f.probabilities(static_cast<std::size_t>(data.max_value())),
                            f.n_params, min_expected);
      },
      py::arg("fit"), py::arg("data"), py::arg("min_expected") = 1.0);
  m.def("gamma_q", &gamma_q, py::arg("s"), py::arg("x"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs an edmcount command; returns (exit_code, stdout, stderr).");
}
