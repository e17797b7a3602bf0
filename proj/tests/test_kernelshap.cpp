#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"
#include "soundshap/kernelshap.hpp"
#include "soundshap/rng.hpp"
#include "soundshap/shap.hpp"

using namespace soundshap;

TEST_CASE("pi weights") {
  SUBCASE("d=2 splits evenly between the singletons") {
    const auto w = pi_weights(2);
    CHECK(w[0] == 0.0);
    CHECK(w[3] == 0.0);
    CHECK(w[1] == doctest::Approx(0.5));
    CHECK(w[2] == doctest::Approx(0.5));
  }
  SUBCASE("d=3 gives every proper subset 1/6") {
    const auto w = pi_weights(3);
    CHECK(w[0] == 0.0);
    CHECK(w[7] == 0.0);
    for (std::uint32_t s = 1; s < 7; ++s) {
      CHECK(w[s] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    }
  }
  SUBCASE("weights sum to one") {
    for (int d = 2; d <= 6; ++d) {
      const auto w = pi_weights(d);
      double total = 0.0;
      for (double v : w) total += v;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(pi_weights(1), std::invalid_argument);
}

TEST_CASE("subset moment matrix") {
  SUBCASE("d=2") {
    const SubsetMomentMatrix m = subset_moment_matrix(2);
    CHECK(m.matrix(0, 0) == doctest::Approx(0.5));
    CHECK(m.matrix(0, 1) == 0.0);
    CHECK(m.p == doctest::Approx(0.5));
    CHECK(m.q == 0.0);
    CHECK(m.q_closed_form == 0.0);  // empty sum: enumeration and closed form agree
  }
  SUBCASE("d=3 enumeration disagrees with the closed form") {
    const SubsetMomentMatrix m = subset_moment_matrix(3);
    CHECK(m.matrix(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.q == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(m.p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // The published closed form lands elsewhere; it is recorded, not asserted.
    CHECK(m.q_closed_form == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("all-ones eigenvector") {
    for (int d = 2; d <= 5; ++d) {
      const SubsetMomentMatrix m = subset_moment_matrix(d);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
      CHECK((m.matrix * ones - (m.p + d * m.q) * ones).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("kernelshap point computation") {
  Grid grid({{0.0, 1.0}, {0.0, 1.0}});
  const TabularFunction prod = product_function(grid);
  Dataset X{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

  SUBCASE("constant function gives zeros") {
    const TabularFunction c = constant_function(grid, 3.0);
    KernelShapConfig cfg;
    const KernelShapReport rep = kernelshap_point(X, c, {1, 1}, cfg);
    for (double v : rep.per_feature) CHECK(std::abs(v) <= 1e-12);
    CHECK(rep.sum_target == 0.0);
  }

  SUBCASE("single-row background recovers point-mass exact shap") {
    Dataset bg{{{0, 0}}};
    KernelShapConfig cfg;
    const KernelShapReport rep = kernelshap_point(bg, prod, {1, 1}, cfg);
    DiscreteDistribution point_mass(grid, {1.0, 0.0, 0.0, 0.0});
    const ShapReport exact = shap_all(point_mass, prod, {1, 1});
    for (int i = 0; i < 2; ++i) {
      CHECK(rep.per_feature[i] ==
            doctest::Approx(exact.per_feature[i]).epsilon(1e-12));
    }
  }

  SUBCASE("sum constraint in both modes") {
    SplitMix64 rng(5);
    std::vector<double> values(grid.num_cells());
    for (double& v : values) v = -1.0 + 2.0 * rng.next_double();
    const TabularFunction f(grid, std::move(values));
    for (const auto mode :
         {KernelShapMode::kFullEnumeration, KernelShapMode::kSampled}) {
      KernelShapConfig cfg;
      cfg.mode = mode;
      cfg.num_subset_samples = 64;
      cfg.rng_seed = 99;
      const KernelShapReport rep = kernelshap_point(X, f, {1, 0}, cfg);
      const double sum = rep.per_feature[0] + rep.per_feature[1];
      CHECK(std::abs(sum - rep.sum_target) <= 1e-9);
    }
  }

  SUBCASE("sampled mode is deterministic given the seed") {
    KernelShapConfig cfg;
    cfg.mode = KernelShapMode::kSampled;
    cfg.num_subset_samples = 32;
    cfg.rng_seed = 1234;
    const KernelShapReport a = kernelshap_point(X, prod, {1, 1}, cfg);
    const KernelShapReport b = kernelshap_point(X, prod, {1, 1}, cfg);
    CHECK(a.per_feature == b.per_feature);
  }

  SUBCASE("input validation") {
    KernelShapConfig cfg;
    cfg.mode = KernelShapMode::kSampled;
    cfg.num_subset_samples = 1;
    CHECK_THROWS_AS(kernelshap_point(X, prod, {1, 1}, cfg), std::invalid_argument);
    KernelShapConfig ok;
    CHECK_THROWS_AS(kernelshap_point(X, prod, {0.5, 1}, ok), std::invalid_argument);
    CHECK_THROWS_AS(kernelshap_point(Dataset{}, prod, {1, 1}, ok),
                    std::invalid_argument);
  }
}

TEST_CASE("limit object equals exact shap") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng.bounded(2));
    std::vector<std::vector<double>> fv(d);
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < 2 + static_cast<int>(rng.bounded(2)); ++k) fv[j].push_back(k);
    }
    Grid grid(std::move(fv));
    std::vector<double> mass(grid.num_cells());
    double total = 0.0;
    for (double& m : mass) {
      m = rng.next_double();
      total += m;
    }
    for (double& m : mass) m /= total;
    DiscreteDistribution dist(grid, std::move(mass));
    std::vector<double> values(grid.num_cells());
    for (double& v : values) v = rng.next_double();
    TabularFunction f(grid, std::move(values));
    const Cell x = grid.cell_at(rng.bounded(grid.num_cells()));
    const KernelShapReport limit = kernelshap_limit(dist, f, x);
    const ShapReport exact = shap_all(dist, f, x);
    for (int i = 0; i < d; ++i) {
      CHECK(std::abs(limit.per_feature[i] - exact.per_feature[i]) <= 1e-9);
    }
  }
}

TEST_CASE("column scrambling") {
  SUBCASE("single row is a fixed point") {
    Dataset X{{{1.0, 2.0, 3.0}}};
    const Dataset s = scramble_columns(X, 7);
    CHECK(s.rows == X.rows);
  }
  SUBCASE("column multisets survive") {
    SplitMix64 rng(37);
    Dataset X;
    for (int r = 0; r < 8; ++r) {
      X.rows.push_back({rng.next_double(), rng.next_double()});
    }
    const Dataset s = scramble_columns(X, 42);
    for (int j = 0; j < 2; ++j) {
      std::vector<double> a, b;
      for (std::size_t r = 0; r < X.rows.size(); ++r) {
        a.push_back(X.rows[r][j]);
        b.push_back(s.rows[r][j]);
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
  SUBCASE("scrambling converges to the extended distribution") {
    // Average empirical masses over many independent scrambles and compare
    // against the extended distribution of the source data.
    Dataset X{{{0, 0}, {0, 0}, {1, 1}, {0, 1}}};
    const auto [grid, mu] = empirical_distribution(X);
    const DiscreteDistribution star = extended_distribution(mu);
    std::vector<double> avg(grid.num_cells(), 0.0);
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      const Dataset s = scramble_columns(X, 1000 + static_cast<std::uint64_t>(t));
      for (const auto& row : s.rows) {
        avg[grid.flat_index(grid.cell_of_row(row))] += 1.0 / (4.0 * trials);
      }
    }
    for (std::size_t k = 0; k < avg.size(); ++k) {
      CHECK(std::abs(avg[k] - star.mass()[k]) <= 0.05);
    }
  }
}

TEST_CASE("aggregate kernelshap") {
  Grid grid({{0.0, 1.0, 2.0}, {0.0, 1.0}});
  Dataset X{{{0, 0}, {1, 1}, {2, 0}, {1, 0}}};
  KernelShapConfig cfg;

  const TabularFunction c = constant_function(grid, 1.0);
  CHECK(aggregate_kernelshap(X, c, 0, cfg) <= 1e-12);

  // A function ignoring feature 0 scores zero for it.
  TabularFunction f1(grid, {0.3, 0.9, 0.3, 0.9, 0.3, 0.9});
  CHECK(aggregate_kernelshap(X, f1, 0, cfg) <= 1e-9);
  CHECK(aggregate_kernelshap(X, f1, 1, cfg) > 1e-3);
}

TEST_CASE("aggregate limit gap") {
  // Dataset enumerating the extended support with proportional
  // multiplicities: the empirical and limit aggregates coincide.
  Dataset X{{{0, 0}, {0, 1}, {1, 0}}};
  const auto [grid, mu] = empirical_distribution(X);
  const DiscreteDistribution star = extended_distribution(mu);
  Dataset Xstar;
  // Marginal counts: feature 0 -> (2,1)/3, feature 1 -> (2,1)/3.
  const int counts0[] = {2, 1};
  const int counts1[] = {2, 1};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int mult = counts0[a] * counts1[b];
      for (int c = 0; c < mult; ++c) {
        Xstar.rows.push_back({static_cast<double>(a), static_cast<double>(b)});
      }
    }
  }
  SplitMix64 rng(43);
  std::vector<double> values(grid.num_cells());
  for (double& v : values) v = rng.next_double();
  const TabularFunction f(grid, std::move(values));
  KernelShapConfig cfg;
  CHECK(aggregate_limit_gap(Xstar, star, f, cfg) <= 1e-9);
  CHECK(aggregate_limit_gap(Xstar, star, constant_function(grid, 2.0), cfg) <= 1e-12);

  SUBCASE("sampled-mode gap shrinks with more subset draws") {
    KernelShapConfig sampled;
    sampled.mode = KernelShapMode::kSampled;
    double prev = -1.0;
    std::vector<double> gaps;
    for (const int samples : {8, 40, 200}) {
      sampled.num_subset_samples = samples;
      double avg = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        sampled.rng_seed = seed;
        avg += aggregate_limit_gap(Xstar, star, f, sampled) / 5.0;
      }
      gaps.push_back(avg);
      (void)prev;
    }
    CHECK(gaps.back() < gaps.front());
  }
}

TEST_CASE("iota decomposition") {
  SplitMix64 rng(47);
  for (const int d : {2, 3}) {
    std::vector<std::vector<double>> fv(d);
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < 2 + static_cast<int>(rng.bounded(2)); ++k) fv[j].push_back(k);
    }
    Grid grid(std::move(fv));
    std::vector<double> mass(grid.num_cells());
    double total = 0.0;
    for (double& m : mass) {
      m = 0.1 + rng.next_double();
      total += m;
    }
    for (double& m : mass) m /= total;
    const DiscreteDistribution star =
        extended_distribution(DiscreteDistribution(grid, std::move(mass)));
    const int i = static_cast<int>(rng.bounded(d));
    // Construction verifies the operator identity internally and throws on
    // disagreement.
    const KernelOperatorDecomposition dec = kernel_operator_decomposition(star, i, 5, rng.next());
    CHECK(dec.coefficients.back() == 1.0 / d);
    for (std::uint32_t s = 0; s < dec.coefficients.size(); ++s) {
      if ((s >> i) & 1u) CHECK(dec.coefficients[s] >= -1e-12);
    }
    CHECK(dec.max_reconstruction_residual <= 1e-9);
  }
}
