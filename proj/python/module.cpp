#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "soundshap/checks.hpp"
#include "soundshap/counterexample.hpp"
#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"
#include "soundshap/kernelshap.hpp"
#include "soundshap/operators.hpp"
#include "soundshap/shap.hpp"
#include "soundshap/simplex.hpp"

namespace py = pybind11;
using namespace soundshap;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact interventional SHAP, KernelSHAP and sound aggregation over "
            "extended distributions";

  py::class_<Grid>(m, "Grid")
      .def(py::init<std::vector<std::vector<double>>>(), py::arg("feature_values"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("num_cells", &Grid::num_cells)
      .def("size", &Grid::size, py::arg("feature"))
      .def("values", &Grid::values, py::arg("feature"))
      .def("flat_index", &Grid::flat_index, py::arg("cell"))
      .def("cell_at", &Grid::cell_at, py::arg("flat"))
      .def("cell_values", &Grid::cell_values, py::arg("cell"))
      .def("cell_of_row", &Grid::cell_of_row, py::arg("row"))
      .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; });

  py::class_<FeatureSubset>(m, "FeatureSubset")
      .def(py::init<std::uint32_t, int>(), py::arg("bits"), py::arg("dim"))
      .def_static("empty", &FeatureSubset::empty, py::arg("dim"))
      .def_static("full", &FeatureSubset::full, py::arg("dim"))
      .def_static("single", &FeatureSubset::single, py::arg("feature"), py::arg("dim"))
      .def("contains", &FeatureSubset::contains)
      .def_property_readonly("bits", &FeatureSubset::bits)
      .def_property_readonly("dim", &FeatureSubset::dim)
      .def_property_readonly("count", &FeatureSubset::count);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](std::vector<std::vector<double>> rows) {
             return Dataset{std::move(rows)};
           }),
           py::arg("rows"))
      .def_property_readonly("rows", [](const Dataset& d) { return d.rows; })
      .def_property_readonly("dim", &Dataset::dim)
      .def("__len__", &Dataset::size);

  py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
      .def(py::init<Grid, std::vector<double>>(), py::arg("grid"), py::arg("mass"))
      .def_property_readonly("grid", &DiscreteDistribution::grid)
      .def_property_readonly("mass", &DiscreteDistribution::mass)
      .def("mass_at", &DiscreteDistribution::mass_at, py::arg("cell"));

  py::class_<TabularFunction>(m, "TabularFunction")
      .def(py::init<Grid, std::vector<double>>(), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &TabularFunction::grid)
      .def_property_readonly("values", &TabularFunction::values)
      .def("at", &TabularFunction::at, py::arg("cell"));

  py::class_<DeterminedCheck>(m, "DeterminedCheck")
      .def_readonly("determined", &DeterminedCheck::determined)
      .def_readonly("vacuous", &DeterminedCheck::vacuous)
      .def("__bool__", [](const DeterminedCheck& c) { return c.determined; });

  py::class_<ShapReport>(m, "ShapReport")
      .def_readonly("point", &ShapReport::point)
      .def_readonly("per_feature", &ShapReport::per_feature)
      .def_readonly("base_value", &ShapReport::base_value);

  m.def("empirical_distribution", &empirical_distribution, py::arg("data"));
  m.def("marginal", &marginal, py::arg("dist"), py::arg("feature"));
  m.def("extended_distribution", &extended_distribution, py::arg("dist"));
  m.def("support_mask", &support_mask, py::arg("dist"), py::arg("tol") = 0.0);
  m.def("is_product_distribution", &is_product_distribution, py::arg("dist"),
        py::arg("tol") = 1e-9);
  m.def("is_determined", &is_determined, py::arg("f"), py::arg("subset"),
        py::arg("mask"), py::arg("tol"));

  m.def("constant_function", &constant_function, py::arg("grid"), py::arg("c"));
  m.def("additive_function", &additive_function, py::arg("grid"));
  m.def("product_function", &product_function, py::arg("grid"));
  m.def("indicator_function", &indicator_function, py::arg("grid"), py::arg("cell"));

  m.def("value_function", &value_function, py::arg("dist"), py::arg("f"),
        py::arg("x"), py::arg("subset"));
  m.def("shap_value", &shap_value, py::arg("dist"), py::arg("f"), py::arg("x"),
        py::arg("feature"));
  m.def("shap_all", &shap_all, py::arg("dist"), py::arg("f"), py::arg("x"));
  m.def("aggregate_shap", &aggregate_shap, py::arg("weight_dist"),
        py::arg("value_dist"), py::arg("f"), py::arg("feature"));

  py::class_<OperatorMatrix>(m, "OperatorMatrix")
      .def_readonly("matrix", &OperatorMatrix::matrix)
      .def_readonly("basis", &OperatorMatrix::basis);
  py::class_<ShapOperators>(m, "ShapOperators")
      .def_readonly("include_feature", &ShapOperators::include_feature)
      .def_readonly("exclude_feature", &ShapOperators::exclude_feature)
      .def_readonly("shap", &ShapOperators::shap);
  py::class_<SpectrumReport>(m, "SpectrumReport")
      .def_readonly("eigenvalues", &SpectrumReport::eigenvalues)
      .def_readonly("min_real", &SpectrumReport::min_real)
      .def_readonly("max_imag_abs", &SpectrumReport::max_imag_abs)
      .def_readonly("violation", &SpectrumReport::violation);
  py::class_<DerivedSeriesReport>(m, "DerivedSeriesReport")
      .def_readonly("dims", &DerivedSeriesReport::dims)
      .def_readonly("vanish_level", &DerivedSeriesReport::vanish_level);

  m.def("extended_support_basis", &extended_support_basis, py::arg("dist"));
  m.def("value_operator_matrix", &value_operator_matrix, py::arg("dist"),
        py::arg("subset"));
  m.def("shap_operator_matrices", &shap_operator_matrices, py::arg("dist"),
        py::arg("feature"));
  m.def("spectrum_check", &spectrum_check, py::arg("A"), py::arg("d"));
  m.def("hermitian_check", &hermitian_check, py::arg("dist_star"), py::arg("subset"));
  m.def("derived_series", &derived_series, py::arg("dist"), py::arg("max_level"),
        py::arg("rank_tol") = 1e-9);
  m.def("reconstruct_determined", &reconstruct_determined, py::arg("dist_star"),
        py::arg("f"), py::arg("feature"));
  m.def("l1_l2_bound_check", &l1_l2_bound_check, py::arg("dist_star"), py::arg("f"),
        py::arg("feature"));

  py::enum_<KernelShapMode>(m, "KernelShapMode")
      .value("SAMPLED", KernelShapMode::kSampled)
      .value("FULL_ENUMERATION", KernelShapMode::kFullEnumeration);
  py::class_<KernelShapConfig>(m, "KernelShapConfig")
      .def(py::init([](KernelShapMode mode, int num_subset_samples,
                       std::uint64_t rng_seed, bool center_f) {
             KernelShapConfig cfg;
             cfg.mode = mode;
             cfg.num_subset_samples = num_subset_samples;
             cfg.rng_seed = rng_seed;
             cfg.center_f = center_f;
             return cfg;
           }),
           py::arg("mode") = KernelShapMode::kFullEnumeration,
           py::arg("num_subset_samples") = 256, py::arg("rng_seed") = 0,
           py::arg("center_f") = true)
      .def_readwrite("mode", &KernelShapConfig::mode)
      .def_readwrite("num_subset_samples", &KernelShapConfig::num_subset_samples)
      .def_readwrite("rng_seed", &KernelShapConfig::rng_seed)
      .def_readwrite("center_f", &KernelShapConfig::center_f);
  py::class_<KernelShapReport>(m, "KernelShapReport")
      .def_readonly("per_feature", &KernelShapReport::per_feature)
      .def_readonly("mode", &KernelShapReport::mode)
      .def_readonly("sum_target", &KernelShapReport::sum_target);
  py::class_<SubsetMomentMatrix>(m, "SubsetMomentMatrix")
      .def_readonly("matrix", &SubsetMomentMatrix::matrix)
      .def_readonly("p", &SubsetMomentMatrix::p)
      .def_readonly("q", &SubsetMomentMatrix::q)
      .def_readonly("p_closed_form", &SubsetMomentMatrix::p_closed_form)
      .def_readonly("q_closed_form", &SubsetMomentMatrix::q_closed_form);
  py::class_<KernelOperatorDecomposition>(m, "KernelOperatorDecomposition")
      .def_readonly("coefficients", &KernelOperatorDecomposition::coefficients)
      .def_readonly("feature", &KernelOperatorDecomposition::feature)
      .def_readonly("max_reconstruction_residual",
                    &KernelOperatorDecomposition::max_reconstruction_residual)
      .def_readonly("p", &KernelOperatorDecomposition::p)
      .def_readonly("q", &KernelOperatorDecomposition::q)
      .def_readonly("p_closed_form", &KernelOperatorDecomposition::p_closed_form)
      .def_readonly("q_closed_form", &KernelOperatorDecomposition::q_closed_form);

  m.def("pi_weights", &pi_weights, py::arg("d"));
  m.def("subset_moment_matrix", &subset_moment_matrix, py::arg("d"));
  m.def("kernelshap_point", &kernelshap_point, py::arg("X"), py::arg("f"),
        py::arg("x"), py::arg("config") = KernelShapConfig{});
  m.def("kernelshap_limit", &kernelshap_limit, py::arg("dist"), py::arg("f"),
        py::arg("x"));
  m.def("scramble_columns", &scramble_columns, py::arg("X"), py::arg("seed"));
  m.def("aggregate_kernelshap", &aggregate_kernelshap, py::arg("X"), py::arg("f"),
        py::arg("feature"), py::arg("config") = KernelShapConfig{});
  m.def("aggregate_limit_gap", &aggregate_limit_gap, py::arg("X_star"), py::arg("dist_star"),
        py::arg("f"), py::arg("config") = KernelShapConfig{});
  m.def("kernel_operator_decomposition", &kernel_operator_decomposition, py::arg("dist_star"),
        py::arg("feature"), py::arg("num_check_functions") = 20,
        py::arg("seed") = 0);

  py::enum_<LpStatus>(m, "LpStatus")
      .value("OPTIMAL", LpStatus::kOptimal)
      .value("INFEASIBLE", LpStatus::kInfeasible)
      .value("UNBOUNDED", LpStatus::kUnbounded);
  py::class_<LPProblem>(m, "LPProblem")
      .def_static("box01", &LPProblem::box01, py::arg("objective"),
                  py::arg("eq_matrix"), py::arg("eq_rhs"))
      .def_readwrite("objective", &LPProblem::objective)
      .def_readwrite("eq_matrix", &LPProblem::eq_matrix)
      .def_readwrite("eq_rhs", &LPProblem::eq_rhs)
      .def_readwrite("lower", &LPProblem::lower)
      .def_readwrite("upper", &LPProblem::upper)
      .def_readonly("notes", &LPProblem::notes);
  py::class_<LpSolution>(m, "LpSolution")
      .def_readonly("status", &LpSolution::status)
      .def_readonly("x", &LpSolution::x)
      .def_readonly("objective", &LpSolution::objective)
      .def_readonly("feasibility_residual", &LpSolution::feasibility_residual)
      .def_readonly("iterations", &LpSolution::iterations);
  m.def("solve_lp", &solve_lp, py::arg("problem"), py::arg("max_iterations") = 20000);

  py::class_<CounterexampleReport>(m, "CounterexampleReport")
      .def_readonly("found", &CounterexampleReport::found)
      .def_readonly("f", &CounterexampleReport::f)
      .def_readonly("objective_value", &CounterexampleReport::objective_value)
      .def_readonly("max_abs_shap_on_support",
                    &CounterexampleReport::max_abs_shap_on_support)
      .def_readonly("max_abs_shap_on_extended",
                    &CounterexampleReport::max_abs_shap_on_extended)
      .def_readonly("feature", &CounterexampleReport::feature)
      .def_readonly("support_mask", &CounterexampleReport::support_mask)
      .def_readonly("objective_pair", &CounterexampleReport::objective_pair)
      .def_readonly("pairs_tried", &CounterexampleReport::pairs_tried)
      .def_readonly("best_objective", &CounterexampleReport::best_objective);
  m.def("ring_support", &ring_support, py::arg("d1"), py::arg("d2"),
        py::arg("r_inner"), py::arg("r_outer"));
  m.def("uniform_on_mask", &uniform_on_mask, py::arg("grid"), py::arg("mask"));
  m.def(
      "find_counterexample",
      [](const Grid& grid, const std::vector<bool>& mask, int feature,
         bool full_extended, double threshold) {
        CounterexampleOptions options;
        options.full_extended = full_extended;
        options.objective_threshold = threshold;
        return find_counterexample(grid, mask, feature, options);
      },
      py::arg("grid"), py::arg("mask"), py::arg("feature"),
      py::arg("full_extended") = false, py::arg("threshold") = 1e-6);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("worst_residual", &CheckResult::worst_residual)
      .def_readonly("seed", &CheckResult::seed)
      .def_readonly("details", &CheckResult::details);
  m.def("check_names", &check_names);
  m.def(
      "run_checks",
      [](const std::vector<std::string>& filters, std::uint64_t seed) {
        CheckOptions options;
        options.seed = seed;
        return run_checks(filters, options);
      },
      py::arg("filters") = std::vector<std::string>{}, py::arg("seed") = 0);
}
