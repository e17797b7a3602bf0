#include <algorithm>
#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "soundshap/counterexample.hpp"
#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"
#include "soundshap/operators.hpp"
#include "soundshap/shap.hpp"

using namespace soundshap;

namespace {

Grid index_grid(int d1, int d2) {
  std::vector<std::vector<double>> fv(2);
  for (int k = 0; k < d1; ++k) fv[0].push_back(k);
  for (int k = 0; k < d2; ++k) fv[1].push_back(k);
  return Grid(std::move(fv));
}

}  // namespace

TEST_CASE("ring masks") {
  const auto all = ring_support(3, 3, 0.0, 10.0);
  CHECK(std::count(all.begin(), all.end(), true) == 9);

  // The 4-cell support used by the small counterexample: the edge-center
  // cells of a 3x3 grid.
  const auto edge = ring_support(3, 3, 0.2, 0.4);
  CHECK(std::count(edge.begin(), edge.end(), true) == 4);
  CHECK(edge[1]);  // (0,1)
  CHECK(edge[3]);  // (1,0)
  CHECK(edge[5]);  // (1,2)
  CHECK(edge[7]);  // (2,1)

  const auto strict = ring_support(4, 4, 0.3, 0.45);
  const auto count = std::count(strict.begin(), strict.end(), true);
  CHECK(count == 8);
  CHECK(count > 0);
  CHECK(count < 16);

  CHECK_THROWS_AS(ring_support(3, 3, 0.4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(ring_support(3, 3, 5.0, 6.0), std::invalid_argument);
}

TEST_CASE("lp construction") {
  const Grid grid = index_grid(3, 3);
  const auto mask = ring_support(3, 3, 0.2, 0.4);
  const DiscreteDistribution dist = uniform_on_mask(grid, mask);

  // Four constrained rows, nine variables; the all-zero function is feasible.
  const LPProblem p = build_lp(dist, mask, 0, {1, 7});
  CHECK(p.eq_matrix.rows() == 4);
  CHECK(p.eq_matrix.cols() == 9);
  CHECK((p.eq_matrix * Eigen::VectorXd::Zero(9)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.notes.empty());  // both pair cells sit inside the mask

  // A pair outside the mask is allowed but noted.
  const LPProblem q = build_lp(dist, mask, 0, {0, 3});
  CHECK(q.notes.size() == 1);

  // Pairs must differ in the target feature only.
  CHECK_THROWS_AS(build_lp(dist, mask, 0, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_lp(dist, mask, 0, {1, 5}), std::invalid_argument);
}

TEST_CASE("counterexample on the 3x3 four-cell support") {
  const Grid grid = index_grid(3, 3);
  const auto mask = ring_support(3, 3, 0.2, 0.4);
  const CounterexampleReport report = find_counterexample(grid, mask, 0);
  REQUIRE(report.found);
  CHECK(report.objective_value >= 0.5);
  CHECK(report.max_abs_shap_on_support <= 1e-8);
  CHECK(report.max_abs_shap_on_extended >= 1e-6);
  // The function genuinely moves along feature 0 at the witness pair.
  const double fa = report.f.at_flat(report.objective_pair.first);
  const double fb = report.f.at_flat(report.objective_pair.second);
  CHECK(fa - fb == doctest::Approx(report.objective_value).epsilon(1e-9));
  for (double v : report.f.values()) {
    CHECK(v >= -1e-9);
    CHECK(v <= 1.0 + 1e-9);
  }
}

TEST_CASE("full extended constraint leaves no counterexample") {
  const Grid grid = index_grid(3, 3);
  const auto mask = ring_support(3, 3, 0.2, 0.4);
  CounterexampleOptions options;
  options.full_extended = true;
  options.objective_threshold = 1e-8;
  const CounterexampleReport report = find_counterexample(grid, mask, 0, options);
  CHECK(!report.found);
  CHECK(report.best_objective <= 1e-8);
  CHECK(report.pairs_tried == 18);  // every ordered pair along feature 0
}

TEST_CASE("ring counterexample reproduces the headline behaviour") {
  const Grid grid = index_grid(5, 5);
  const auto mask = ring_support(5, 5, 0.25, 0.52);
  const CounterexampleReport report = find_counterexample(grid, mask, 0);
  REQUIRE(report.found);

  const DiscreteDistribution mu = uniform_on_mask(grid, mask);
  const DiscreteDistribution star = extended_distribution(mu);

  // Aggregate SHAP over the data support misses the dependence...
  CHECK(aggregate_shap(mu, mu, report.f, 0) <= 1e-8);
  // ...while the extended-distribution aggregate exposes it.
  const double agg_star = aggregate_shap(star, star, report.f, 0);
  CHECK(agg_star > 1e-6);

  // Reconstruction bound on this instance: the nearest function that
  // ignores feature 0 stays d^2 * aggregate away in squared distance.
  const TabularFunction g = reconstruct_determined(star, report.f, 0);
  double dist2 = 0.0;
  for (std::size_t k = 0; k < grid.num_cells(); ++k) {
    const double diff = report.f.at_flat(k) - g.at_flat(k);
    dist2 += star.mass()[k] * diff * diff;
  }
  CHECK(dist2 <= 4.0 * agg_star + 1e-9);
  // The function is genuinely not determined without feature 0, so the
  // distance is bounded away from zero as well.
  CHECK(dist2 > 1e-6);
}
