#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "soundshap/simplex.hpp"

using namespace soundshap;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("unconstrained box maximization") {
  LPProblem p = LPProblem::box01(Eigen::VectorXd::Ones(1), Eigen::MatrixXd(0, 1),
                                 Eigen::VectorXd(0));
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("simple equality constraint") {
  Eigen::MatrixXd A(1, 2);
  A << 1.0, 1.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  LPProblem p = LPProblem::box01(Eigen::VectorXd::Ones(2), A, b);
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.feasibility_residual <= 1e-12);
}

TEST_CASE("infeasible system") {
  Eigen::MatrixXd A(1, 1);
  A << 1.0;
  Eigen::VectorXd b(1);
  b << 2.0;
  LPProblem p = LPProblem::box01(Eigen::VectorXd::Ones(1), A, b);
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded ray") {
  LPProblem p;
  p.objective = Eigen::VectorXd::Ones(1);
  p.eq_matrix = Eigen::MatrixXd(0, 1);
  p.eq_rhs = Eigen::VectorXd(0);
  p.lower = Eigen::VectorXd::Zero(1);
  p.upper = Eigen::VectorXd::Constant(1, kInf);
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kUnbounded);
}

TEST_CASE("degenerate objective ties resolve") {
  // Maximize x1 - x2 subject to x1 = x2; the optimum is any point with
  // objective zero.
  Eigen::MatrixXd A(1, 2);
  A << 1.0, -1.0;
  Eigen::VectorXd b(1);
  b << 0.0;
  Eigen::VectorXd c(2);
  c << 1.0, -1.0;
  LPProblem p = LPProblem::box01(c, A, b);
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(std::abs(sol.objective) <= 1e-10);
}

TEST_CASE("iteration cap raises with a basis dump") {
  Eigen::MatrixXd A(2, 4);
  A << 1.0, 0.5, -0.25, 1.0, 0.0, 1.0, 0.75, -0.5;
  Eigen::VectorXd b(2);
  b << 0.4, 0.3;
  LPProblem p = LPProblem::box01(Eigen::VectorXd::Ones(4), A, b);
  CHECK_THROWS_WITH_AS(solve_lp(p, 1), doctest::Contains("basis"),
                       std::runtime_error);
}

TEST_CASE("general bounds") {
  // Maximize -x over x in [-3, -1]: the optimum pins x at its lower bound.
  LPProblem p;
  p.objective = Eigen::VectorXd::Constant(1, -1.0);
  p.eq_matrix = Eigen::MatrixXd(0, 1);
  p.eq_rhs = Eigen::VectorXd(0);
  p.lower = Eigen::VectorXd::Constant(1, -3.0);
  p.upper = Eigen::VectorXd::Constant(1, -1.0);
  const LpSolution sol = solve_lp(p);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0));
}
