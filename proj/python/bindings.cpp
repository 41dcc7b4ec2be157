#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cohere/bounds.hpp"
#include "cohere/harness.hpp"
#include "cohere/problems.hpp"
#include "cohere/regularizer.hpp"

namespace py = pybind11;
using namespace cohere;

namespace {

std::string csv_text(const ExperimentResult& res) {
  std::ostringstream out;
  write_csv(out, res.runs);
  return out.str();
}

std::string summary_text(const ExperimentResult& res, const ExperimentConfig& c) {
  std::ostringstream out;
  write_summary(out, res.summary, c);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FTRL optimizer with a linearithmic regularizer: core operations";

  py::register_exception<RunAbort>(m, "RunAbort", PyExc_RuntimeError);

  // ---- regularizer -----------------------------------------------------
  py::class_<RegularizerParams>(m, "RegularizerParams")
      .def(py::init([](double S, double Q) { return RegularizerParams{S, Q}; }),
           py::arg("S") = 2.0, py::arg("Q") = 0.0)
      .def_readwrite("S", &RegularizerParams::S)
      .def_readwrite("Q", &RegularizerParams::Q)
      .def_static("from_s2", &RegularizerParams::from_s2, py::arg("s2"), py::arg("q"))
      .def("__repr__", [](const RegularizerParams& p) {
        std::ostringstream s;
        s << "RegularizerParams(S=" << p.S << ", Q=" << p.Q << ")";
        return s.str();
      });

  m.def("lambert_w0", &lambert_w0, py::arg("x"),
        "Principal branch W0 on [0, inf): the unique w >= 0 with w*e^w = x.");
  m.def("branch_point", &branch_point, py::arg("params"),
        "Radius where psi's W-branch hands over to the linear-log branch.");
  m.def("psi", &psi, py::arg("x"), py::arg("params"));
  m.def("psi_prime", &psi_prime, py::arg("x"), py::arg("params"));
  m.def("psi_second", &psi_second, py::arg("x"), py::arg("params"));
  m.def("psi_star", &psi_star, py::arg("theta"), py::arg("params"));
  m.def("psi_star_prime", &psi_star_prime, py::arg("theta"), py::arg("params"));
  m.def(
      "grad_phi_star",
      [](const std::vector<double>& theta, const RegularizerParams& p) {
        return grad_phi_star(theta, p);
      },
      py::arg("theta"), py::arg("params"),
      "Map from dual state theta to the (centered) next iterate.");

  // ---- bounds ----------------------------------------------------------
  m.def("theorem2_bound", &theorem2_bound, py::arg("T"), py::arg("alpha"), py::arg("G"),
        py::arg("r"), "Running-average optimality-gap bound.");
  m.def("theorem3_bound", &theorem3_bound, py::arg("T"), py::arg("alpha"), py::arg("G"),
        py::arg("r"), "Last-iterate optimality-gap bound.");
  m.def("theoremF_bound", &theoremF_bound, py::arg("T"), py::arg("alpha"), py::arg("G"),
        py::arg("sigma"), py::arg("L"), py::arg("phi_inf_u"),
        "Adaptive-schedule bound on the (1-alpha) power of the gap.");

  // ---- harness ---------------------------------------------------------
  py::enum_<ScheduleKind>(m, "ScheduleKind")
      .value("power", ScheduleKind::power)
      .value("adaptive", ScheduleKind::adaptive);

  py::enum_<QUpdateRule>(m, "QUpdateRule")
      .value("reconciled", QUpdateRule::reconciled)
      .value("printed", QUpdateRule::printed);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("problem", &ExperimentConfig::problem)
      .def_readwrite("dim", &ExperimentConfig::dim)
      .def_readwrite("r", &ExperimentConfig::r)
      .def_readwrite("schedule", &ExperimentConfig::schedule)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("T", &ExperimentConfig::T)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("record_stride", &ExperimentConfig::record_stride)
      .def_readwrite("checks_enabled", &ExperimentConfig::checks_enabled)
      .def_readwrite("q_update", &ExperimentConfig::q_update)
      .def_readwrite("algo", &ExperimentConfig::algo)
      .def_readwrite("id", &ExperimentConfig::id)
      .def("__repr__", [](const ExperimentConfig& c) {
        return "ExperimentConfig(" + experiment_id(c) + ")";
      });

  m.def("validate", &validate, py::arg("config"),
        "Raises ValueError on any out-of-contract field.");
  m.def("experiment_id", &experiment_id, py::arg("config"));
  m.def("problem_names", &problem_names);

  py::class_<CsvRow>(m, "CsvRow")
      .def_readonly("t", &CsvRow::t)
      .def_readonly("eta", &CsvRow::eta)
      .def_readonly("f_gap_last", &CsvRow::f_gap_last)
      .def_readonly("f_gap_avg", &CsvRow::f_gap_avg)
      .def_readonly("dist_to_opt", &CsvRow::dist_to_opt)
      .def_readonly("S2", &CsvRow::S2)
      .def_readonly("Q", &CsvRow::Q)
      .def_readonly("theta_norm", &CsvRow::theta_norm)
      .def_readonly("check_violations", &CsvRow::check_violations);

  py::class_<SeedSummary>(m, "SeedSummary")
      .def_readonly("id", &SeedSummary::id)
      .def_readonly("seed", &SeedSummary::seed)
      .def_readonly("f_gap_last", &SeedSummary::f_gap_last)
      .def_readonly("f_gap_avg", &SeedSummary::f_gap_avg)
      .def_readonly("dist_to_opt", &SeedSummary::dist_to_opt)
      .def_readonly("S2_T", &SeedSummary::S2_T)
      .def_readonly("Q_T", &SeedSummary::Q_T)
      .def_readonly("check_violations", &SeedSummary::check_violations);

  py::class_<RunOutput>(m, "RunOutput")
      .def_readonly("rows", &RunOutput::rows)
      .def_readonly("summary", &RunOutput::summary);

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("id", &RunSummary::id)
      .def_readonly("per_seed", &RunSummary::per_seed)
      .def_readonly("mean_gap_last", &RunSummary::mean_gap_last)
      .def_readonly("median_gap_last", &RunSummary::median_gap_last)
      .def_readonly("stderr_gap_last", &RunSummary::stderr_gap_last)
      .def_readonly("mean_gap_avg", &RunSummary::mean_gap_avg)
      .def_readonly("median_gap_avg", &RunSummary::median_gap_avg)
      .def_readonly("stderr_gap_avg", &RunSummary::stderr_gap_avg)
      .def_readonly("mean_dist", &RunSummary::mean_dist)
      .def_readonly("median_dist", &RunSummary::median_dist)
      .def_readonly("stderr_dist", &RunSummary::stderr_dist)
      .def_readonly("max_S2", &RunSummary::max_S2)
      .def_readonly("max_Q", &RunSummary::max_Q)
      .def_readonly("check_violations", &RunSummary::check_violations)
      .def_readonly("bound2", &RunSummary::bound2)
      .def_readonly("bound3", &RunSummary::bound3);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("runs", &ExperimentResult::runs)
      .def_readonly("summary", &ExperimentResult::summary);

  m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>(),
        "Run every seed (jobs-way parallel) and aggregate; deterministic output order.");
  m.def("csv_text", &csv_text, py::arg("result"),
        "Per-round CSV (same bytes the CLI writes).");
  m.def("summary_text", &summary_text, py::arg("result"), py::arg("config"),
        "One-row summary CSV with the bound columns.");
}
