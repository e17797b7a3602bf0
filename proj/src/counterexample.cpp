#include "soundshap/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "soundshap/operators.hpp"
#include "soundshap/shap.hpp"

namespace soundshap {

std::vector<bool> ring_support(int d1, int d2, double r_inner, double r_outer) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("grid sides must be positive");
  if (!(0.0 <= r_inner && r_inner < r_outer)) {
    throw std::invalid_argument("ring radii must satisfy 0 <= r_inner < r_outer");
  }
  std::vector<bool> mask(static_cast<std::size_t>(d1) * d2, false);
  bool any = false;
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      const double u = (i + 0.5) / d1 - 0.5;
      const double v = (j + 0.5) / d2 - 0.5;
      const double r = std::hypot(u, v);
      if (r_inner <= r && r <= r_outer) {
        mask[static_cast<std::size_t>(i) * d2 + j] = true;
        any = true;
      }
    }
  }
  if (!any) throw std::invalid_argument("ring radii select no cells");
  return mask;
}

DiscreteDistribution uniform_on_mask(const Grid& grid, const std::vector<bool>& mask) {
  if (mask.size() != grid.num_cells()) {
    throw std::invalid_argument("mask size does not match grid cell count");
  }
  const auto count = std::count(mask.begin(), mask.end(), true);
  if (count == 0) throw std::invalid_argument("mask selects no cells");
  std::vector<double> m(mask.size(), 0.0);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k]) m[k] = 1.0 / static_cast<double>(count);
  }
  return {grid, std::move(m)};
}

LPProblem build_lp(const DiscreteDistribution& dist_on_mask,
                   const std::vector<bool>& constraint_mask, int feature,
                   std::pair<std::size_t, std::size_t> objective_pair) {
  const Grid& grid = dist_on_mask.grid();
  const int d = grid.dim();
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  if (constraint_mask.size() != grid.num_cells()) {
    throw std::invalid_argument("constraint mask size does not match grid");
  }
  const Cell a = grid.cell_at(objective_pair.first);
  const Cell b = grid.cell_at(objective_pair.second);
  for (int j = 0; j < d; ++j) {
    if (j != feature && a[j] != b[j]) {
      throw std::invalid_argument(
          "objective pair must agree on every feature except the target");
    }
  }
  if (a[feature] == b[feature]) {
    throw std::invalid_argument("objective pair must differ in the target feature");
  }

  const ShapOperators ops = shap_operator_matrices(dist_on_mask, feature);
  const auto& basis = ops.shap.basis;
  const auto m = static_cast<Eigen::Index>(basis.size());

  std::vector<Eigen::Index> pos_of_flat(grid.num_cells(),
                                        static_cast<Eigen::Index>(-1));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    pos_of_flat[basis[k]] = static_cast<Eigen::Index>(k);
  }
  const Eigen::Index pa = pos_of_flat[objective_pair.first];
  const Eigen::Index pb = pos_of_flat[objective_pair.second];
  if (pa < 0 || pb < 0) {
    throw std::invalid_argument("objective pair lies outside the extended support");
  }

  std::vector<Eigen::Index> constrained_rows;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (constraint_mask[basis[k]]) {
      constrained_rows.push_back(static_cast<Eigen::Index>(k));
    }
  }

  Eigen::VectorXd objective = Eigen::VectorXd::Zero(m);
  objective[pa] = 1.0;
  objective[pb] = -1.0;
  Eigen::MatrixXd eq(static_cast<Eigen::Index>(constrained_rows.size()), m);
  for (std::size_t r = 0; r < constrained_rows.size(); ++r) {
    eq.row(static_cast<Eigen::Index>(r)) = ops.shap.matrix.row(constrained_rows[r]);
  }
  LPProblem p = LPProblem::box01(
      std::move(objective), std::move(eq),
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constrained_rows.size())));

  const std::vector<bool> data_mask = support_mask(dist_on_mask);
  if (!data_mask[objective_pair.first] || !data_mask[objective_pair.second]) {
    p.notes.push_back("objective pair lies outside the data support");
  }
  return p;
}

CounterexampleReport find_counterexample(const Grid& grid,
                                         const std::vector<bool>& mask, int feature,
                                         const CounterexampleOptions& options) {
  if (mask.size() != grid.num_cells()) {
    throw std::invalid_argument("mask size does not match grid cell count");
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("mask selects no cells");
  }
  const DiscreteDistribution dist =
      options.mass ? *options.mass : uniform_on_mask(grid, mask);
  const DiscreteDistribution star = extended_distribution(dist);
  const std::vector<bool> star_mask = support_mask(star);
  const std::vector<bool>& constraint_mask =
      options.full_extended ? star_mask : mask;

  // All ordered pairs of extended-support cells differing only in the target
  // feature, ordered by index gap along that feature, then lexicographically.
  const std::vector<std::size_t> basis = extended_support_basis(dist);
  struct Pair {
    int gap;
    std::size_t a, b;
  };
  std::vector<Pair> pairs;
  for (std::size_t fa : basis) {
    const Cell a = grid.cell_at(fa);
    for (std::size_t fb : basis) {
      if (fa == fb) continue;
      const Cell b = grid.cell_at(fb);
      bool admissible = a[feature] != b[feature];
      for (int j = 0; admissible && j < grid.dim(); ++j) {
        if (j != feature && a[j] != b[j]) admissible = false;
      }
      if (admissible) {
        pairs.push_back({std::abs(a[feature] - b[feature]), fa, fb});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.gap != y.gap) return x.gap < y.gap;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  CounterexampleReport report{.found = false,
                              .f = constant_function(grid, 0.0),
                              .feature = feature,
                              .support_mask = mask};
  for (const Pair& pair : pairs) {
    const LPProblem lp = build_lp(dist, constraint_mask, feature, {pair.a, pair.b});
    const LpSolution sol = solve_lp(lp);
    ++report.pairs_tried;
    if (sol.status != LpStatus::kOptimal) {
      throw std::runtime_error("counterexample LP came back " +
                               std::string(sol.status == LpStatus::kInfeasible
                                               ? "infeasible"
                                               : "unbounded") +
                               "; the zero function should always be feasible");
    }
    report.best_objective = std::max(report.best_objective, sol.objective);
    if (sol.objective <= options.objective_threshold) continue;

    report.found = true;
    report.objective_value = sol.objective;
    report.objective_pair = {pair.a, pair.b};
    report.f = expand_from_basis(grid, sol.x, basis);

    // Judge the solution with the exact SHAP path, not the solver.
    double on_support = 0.0;
    double on_extended = 0.0;
    for (std::size_t flat : basis) {
      const double phi =
          std::abs(shap_value(dist, report.f, grid.cell_at(flat), feature));
      on_extended = std::max(on_extended, phi);
      if (mask[flat]) on_support = std::max(on_support, phi);
    }
    report.max_abs_shap_on_support = on_support;
    report.max_abs_shap_on_extended = on_extended;
    return report;
  }
  return report;
}

}  // namespace soundshap
