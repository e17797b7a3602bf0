#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"
#include "soundshap/simplex.hpp"

namespace soundshap {

/// Cell mask on a d1 x d2 grid selecting cells whose normalized center
/// distance from the grid midpoint lies in [r_inner, r_outer]. Cell centers
/// live at ((k+0.5)/size - 0.5) per axis, so the farthest corners sit at
/// distance just under sqrt(0.5).
std::vector<bool> ring_support(int d1, int d2, double r_inner, double r_outer);

struct CounterexampleOptions {
  /// Constrain the SHAP values to vanish on the whole extended support
  /// instead of only the masked cells.
  bool full_extended = false;
  /// A pair counts as a counterexample when its LP objective exceeds this.
  double objective_threshold = 1e-6;
  /// Measure used inside the SHAP operator; defaults to uniform on the mask.
  std::optional<DiscreteDistribution> mass;
};

struct CounterexampleReport {
  bool found = false;
  TabularFunction f;
  double objective_value = 0.0;
  double max_abs_shap_on_support = 0.0;
  double max_abs_shap_on_extended = 0.0;
  int feature = 0;
  std::vector<bool> support_mask;
  /// Flat grid indices of the objective pair (maximize f(first) - f(second)).
  std::pair<std::size_t, std::size_t> objective_pair{0, 0};
  int pairs_tried = 0;
  /// Best objective over all pairs when nothing crossed the threshold.
  double best_objective = 0.0;
};

/// Uniform distribution over the masked cells.
DiscreteDistribution uniform_on_mask(const Grid& grid, const std::vector<bool>& mask);

/// LP whose variables are function values on the extended-support cells:
/// the SHAP-operator rows of the constrained cells are pinned to zero, the
/// objective is f(a) - f(b) for a pair of cells differing only in `feature`,
/// and every variable is boxed to [0,1]. Pairs outside the mask are allowed
/// but noted on the problem.
LPProblem build_lp(const DiscreteDistribution& dist_on_mask,
                   const std::vector<bool>& constraint_mask, int feature,
                   std::pair<std::size_t, std::size_t> objective_pair);

/// Searches objective pairs in a deterministic order (smaller index gaps
/// along `feature` first, then lexicographic) and returns the first function
/// whose objective crosses the threshold. The returned SHAP magnitudes are
/// recomputed exactly, not read off the solver.
CounterexampleReport find_counterexample(const Grid& grid,
                                         const std::vector<bool>& mask, int feature,
                                         const CounterexampleOptions& options = {});

}  // namespace soundshap
