// Python bindings for the estimation core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustde/dataset.hpp"
#include "robustde/errors.hpp"
#include "robustde/estimator.hpp"
#include "robustde/rng.hpp"
#include "robustde/sensitivity.hpp"
#include "robustde/simulate.hpp"
#include "robustde/stats.hpp"
#include "robustde/survey.hpp"

namespace py = pybind11;
using namespace robustde;

PYBIND11_MODULE(_robustde, m) {
    m.doc() = "model-robust direct effect estimation";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<ColumnSpec>(m, "ColumnSpec")
        .def(py::init<>())
        .def_readwrite("x", &ColumnSpec::x)
        .def_readwrite("a", &ColumnSpec::a)
        .def_readwrite("w", &ColumnSpec::w)
        .def_readwrite("y", &ColumnSpec::y)
        .def_readwrite("weight", &ColumnSpec::weight)
        .def_readwrite("stratum", &ColumnSpec::stratum)
        .def_readwrite("psu", &ColumnSpec::psu);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("x", &Dataset::x)
        .def_readwrite("a", &Dataset::a)
        .def_readwrite("w", &Dataset::w)
        .def_readwrite("y", &Dataset::y)
        .def_readwrite("weight", &Dataset::weight)
        .def_readwrite("stratum", &Dataset::stratum)
        .def_readwrite("psu", &Dataset::psu)
        .def_readonly("dropped_rows", &Dataset::dropped_rows)
        .def("n", &Dataset::n)
        .def("p", &Dataset::p)
        .def("weighted", &Dataset::weighted)
        .def("has_design", &Dataset::has_design)
        .def("validate", &Dataset::validate);

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("columns"),
          "Read a complete-case dataset from a CSV file.");
    m.def("is_binary_focal", &is_binary_focal, py::arg("w"));

    py::class_<ClipBounds>(m, "ClipBounds")
        .def(py::init<>())
        .def_readwrite("lo", &ClipBounds::lo)
        .def_readwrite("hi", &ClipBounds::hi);

    py::class_<EstimateOptions>(m, "EstimateOptions")
        .def(py::init<>())
        .def_readwrite("K", &EstimateOptions::K)
        .def_readwrite("seed", &EstimateOptions::seed)
        .def_readwrite("clip", &EstimateOptions::clip)
        .def_readwrite("alpha", &EstimateOptions::alpha);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_readonly("estimand", &EstimateResult::estimand)
        .def_readonly("point", &EstimateResult::point)
        .def_readonly("se", &EstimateResult::se)
        .def_readonly("ci_lo", &EstimateResult::ci_lo)
        .def_readonly("ci_hi", &EstimateResult::ci_hi)
        .def_readonly("n", &EstimateResult::n)
        .def_readonly("K", &EstimateResult::K)
        .def_readonly("seed", &EstimateResult::seed)
        .def_readonly("alpha", &EstimateResult::alpha)
        .def_readonly("warnings", &EstimateResult::warnings);

    m.def("estimate_psi", &estimate_psi, py::arg("dataset"), py::arg("options"),
          "Cross-fitted doubly robust one-step estimate of the direct effect.");
    m.def("estimate_lambda", &estimate_lambda, py::arg("dataset"),
          py::arg("options"),
          "Mediation-formula comparator estimate (no standard error).");
    m.def("wald_p", &wald_p, py::arg("point"), py::arg("se"));

    py::class_<UnionTestResult>(m, "UnionTestResult")
        .def_readonly("p_psi", &UnionTestResult::p_psi)
        .def_readonly("p_lambda", &UnionTestResult::p_lambda)
        .def_readonly("p_max", &UnionTestResult::p_max)
        .def_readonly("reject", &UnionTestResult::reject)
        .def_readonly("alpha", &UnionTestResult::alpha);

    m.def("union_test", &union_test, py::arg("p_psi"), py::arg("p_lambda"),
          py::arg("alpha") = 0.05);
    m.def("comparator_bootstrap_p", &comparator_bootstrap_p, py::arg("dataset"),
          py::arg("B"), py::arg("seed"), py::arg("options"));

    m.def("gap_binary", &gap_binary, py::arg("dataset"));
    m.def("gap_conditional", &gap_conditional, py::arg("dataset"));
    m.def("tv_binary", &tv_binary, py::arg("dataset"));
    m.def("tv_linear_gaussian", &tv_linear_gaussian, py::arg("dataset"));
    m.def("bound", &bound, py::arg("psi_hat"), py::arg("gamma"),
          py::arg("e_tv"));

    py::class_<SensitivityOptions>(m, "SensitivityOptions")
        .def(py::init<>())
        .def_readwrite("gamma", &SensitivityOptions::gamma)
        .def_readwrite("estimate", &SensitivityOptions::estimate);

    py::class_<SensitivityReport>(m, "SensitivityReport")
        .def_readonly("psi", &SensitivityReport::psi)
        .def_readonly("gamma", &SensitivityReport::gamma)
        .def_readonly("gamma_supplied", &SensitivityReport::gamma_supplied)
        .def_readonly("e_tv", &SensitivityReport::e_tv)
        .def_readonly("gap", &SensitivityReport::gap)
        .def_readonly("lo", &SensitivityReport::lo)
        .def_readonly("hi", &SensitivityReport::hi);

    m.def("sensitivity_report", &sensitivity_report, py::arg("dataset"),
          py::arg("options"));

    py::class_<DgpSpec>(m, "DgpSpec")
        .def(py::init<>())
        .def_readwrite("case_id", &DgpSpec::case_id)
        .def_readwrite("intercept", &DgpSpec::intercept)
        .def_readwrite("a_coef", &DgpSpec::a_coef)
        .def_readwrite("w_coef", &DgpSpec::w_coef)
        .def_readwrite("aw_coef", &DgpSpec::aw_coef)
        .def_readwrite("x_coef", &DgpSpec::x_coef)
        .def_readwrite("fixed_x", &DgpSpec::fixed_x)
        .def_static("standard", &DgpSpec::standard, py::arg("case_id"))
        .def_static("null_effect", &DgpSpec::null_effect, py::arg("case_id"))
        .def("validate", &DgpSpec::validate);

    m.def("draw", &draw, py::arg("spec"), py::arg("n"), py::arg("seed"));

    py::class_<TruthPair>(m, "TruthPair")
        .def_readonly("psi", &TruthPair::psi)
        .def_readonly("lambda_", &TruthPair::lambda)
        .def_readonly("method", &TruthPair::method);

    m.def("truth", &truth, py::arg("spec"),
          "Population values of both estimands under the generating process.");

    py::class_<StudyConfig>(m, "StudyConfig")
        .def(py::init<>())
        .def_readwrite("cases", &StudyConfig::cases)
        .def_readwrite("sample_sizes", &StudyConfig::sample_sizes)
        .def_readwrite("reps", &StudyConfig::reps)
        .def_readwrite("K", &StudyConfig::K)
        .def_readwrite("seed", &StudyConfig::seed)
        .def_readwrite("clip", &StudyConfig::clip)
        .def_readwrite("alpha", &StudyConfig::alpha)
        .def_readwrite("comparator", &StudyConfig::comparator)
        .def_readwrite("max_failure_rate", &StudyConfig::max_failure_rate)
        .def_readwrite("threads", &StudyConfig::threads);

    py::class_<SimSummary>(m, "SimSummary")
        .def_readonly("case_id", &SimSummary::case_id)
        .def_readonly("n", &SimSummary::n)
        .def_readonly("reps", &SimSummary::reps)
        .def_readonly("psi_true", &SimSummary::psi_true)
        .def_readonly("lambda_true", &SimSummary::lambda_true)
        .def_readonly("mean_psi", &SimSummary::mean_psi)
        .def_readonly("bias_psi", &SimSummary::bias_psi)
        .def_readonly("rmse_psi", &SimSummary::rmse_psi)
        .def_readonly("coverage95", &SimSummary::coverage95)
        .def_readonly("mc_sd_psi", &SimSummary::mc_sd_psi)
        .def_readonly("mean_se_psi", &SimSummary::mean_se_psi)
        .def_readonly("mean_lambda", &SimSummary::mean_lambda)
        .def_readonly("lambda_bias_to_psi", &SimSummary::lambda_bias_to_psi)
        .def_readonly("mc_sd_lambda", &SimSummary::mc_sd_lambda)
        .def_readonly("failures", &SimSummary::failures);

    m.def(
        "run_study",
        [](const StudyConfig& cfg) { return run_study(cfg); },
        py::arg("config"),
        "Replicate study over the built-in generating processes.");

    m.def("six_year_weight", &six_year_weight, py::arg("two_year_weight"));
    m.def("hajek_mean", &hajek_mean, py::arg("values"), py::arg("weights"));

    py::class_<WeightedPsiResult>(m, "WeightedPsiResult")
        .def_readonly("estimate", &WeightedPsiResult::estimate)
        .def_readonly("lonely_psu_strata", &WeightedPsiResult::lonely_psu_strata);

    m.def("estimate_psi_weighted", &estimate_psi_weighted, py::arg("dataset"),
          py::arg("options"),
          "Survey-weighted estimate with a Taylor linearization variance.");

    py::enum_<BootTarget>(m, "BootTarget")
        .value("psi", BootTarget::psi)
        .value("lambda_", BootTarget::lambda)
        .value("difference", BootTarget::difference);

    py::class_<BootstrapOptions>(m, "BootstrapOptions")
        .def(py::init<>())
        .def_readwrite("B", &BootstrapOptions::B)
        .def_readwrite("seed", &BootstrapOptions::seed)
        .def_readwrite("estimate", &BootstrapOptions::estimate)
        .def_readwrite("targets", &BootstrapOptions::targets)
        .def_readwrite("max_skip_rate", &BootstrapOptions::max_skip_rate)
        .def_readwrite("threads", &BootstrapOptions::threads);

    py::class_<TargetSummary>(m, "TargetSummary")
        .def_readonly("target", &TargetSummary::target)
        .def_readonly("point", &TargetSummary::point)
        .def_readonly("replicates", &TargetSummary::replicates)
        .def_readonly("ci_lo", &TargetSummary::ci_lo)
        .def_readonly("ci_hi", &TargetSummary::ci_hi);

    py::class_<BootstrapResult>(m, "BootstrapResult")
        .def_readonly("targets", &BootstrapResult::targets)
        .def_readonly("B", &BootstrapResult::B)
        .def_readonly("skipped", &BootstrapResult::skipped)
        .def_readonly("seed", &BootstrapResult::seed);

    m.def("psu_bootstrap", &psu_bootstrap, py::arg("dataset"),
          py::arg("options"),
          "Stratified PSU bootstrap over a weighted survey sample.");
    m.def("percentile_interval", &percentile_interval, py::arg("replicates"),
          py::arg("alpha"));

    m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"));
}
