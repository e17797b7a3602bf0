#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace soundshap {

/// Equality-constrained LP with box bounds:
///   maximize objective . x   subject to   eq_matrix x = eq_rhs,
///   lower <= x <= upper  (upper entries may be +infinity).
struct LPProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::string> notes;

  /// Convenience constructor with [0,1] bounds on every variable.
  static LPProblem box01(Eigen::VectorXd objective, Eigen::MatrixXd eq_matrix,
                         Eigen::VectorXd eq_rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  double feasibility_residual = 0.0;
  int iterations = 0;
};

/// Two-phase bounded-variable primal simplex with Bland's anti-cycling rule.
/// Throws when the iteration cap is exceeded, with the current basis in the
/// message.
LpSolution solve_lp(const LPProblem& problem, int max_iterations = 20000);

}  // namespace soundshap
