#include "soundshap/simplex.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace soundshap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-9;

enum class VarState { kBasic, kAtLower, kAtUpper };

// Working tableau-free revised simplex; the basis system is refactorized
// every iteration, which is fine at the problem sizes this solver targets
// (at most a few hundred variables, a few dozen rows).
struct Solver {
  Eigen::MatrixXd A;  // k x n, structural + artificial columns
  Eigen::VectorXd b, lower, upper, cost;
  Eigen::Index k, n;
  std::vector<Eigen::Index> basis;  // one variable per row
  std::vector<VarState> state;
  Eigen::VectorXd x;
  int iterations = 0;

  std::string basis_dump() const {
    std::ostringstream os;
    os << "basis=[";
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (i) os << ",";
      os << basis[i];
    }
    os << "]";
    return os.str();
  }

  void set_nonbasic_values() {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state[j] == VarState::kAtLower) {
        x[j] = lower[j];
      } else if (state[j] == VarState::kAtUpper) {
        x[j] = upper[j];
      }
    }
  }

  // Recompute basic values from the nonbasic assignment.
  Eigen::PartialPivLU<Eigen::MatrixXd> refactor() {
    Eigen::MatrixXd B(k, k);
    for (Eigen::Index i = 0; i < k; ++i) B.col(i) = A.col(basis[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::VectorXd rhs = b;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (state[j] != VarState::kBasic && x[j] != 0.0) rhs -= A.col(j) * x[j];
    }
    const Eigen::VectorXd xb = lu.solve(rhs);
    for (Eigen::Index i = 0; i < k; ++i) x[basis[i]] = xb[i];
    return lu;
  }

  // Returns true when an optimal point was reached, false on unboundedness.
  bool run(int max_iterations) {
    for (;;) {
      if (++iterations > max_iterations) {
        throw std::runtime_error("simplex iteration cap exceeded; " + basis_dump());
      }
      set_nonbasic_values();
      auto lu = refactor();

      Eigen::VectorXd cb(k);
      for (Eigen::Index i = 0; i < k; ++i) cb[i] = cost[basis[i]];
      const Eigen::VectorXd y = lu.transpose().solve(cb);

      // Bland's rule: the entering variable is the lowest-index nonbasic
      // with a favorable reduced cost.
      Eigen::Index enter = -1;
      int direction = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (state[j] == VarState::kBasic) continue;
        if (lower[j] == upper[j]) continue;  // fixed variable
        const double r = cost[j] - y.dot(A.col(j));
        if (state[j] == VarState::kAtLower && r > kCostTol) {
          enter = j;
          direction = 1;
          break;
        }
        if (state[j] == VarState::kAtUpper && r < -kCostTol) {
          enter = j;
          direction = -1;
          break;
        }
      }
      if (enter < 0) return true;

      const Eigen::VectorXd delta = lu.solve(A.col(enter));
      // Step length before the entering variable or a basic variable hits a
      // bound. Moving enter by +t*direction moves basic i by
      // -t*direction*delta[i].
      const double flip_t = upper[enter] - lower[enter];
      double basic_t = kInf;
      Eigen::Index leave = -1;  // row index of the blocking basic variable
      int leave_to = 0;         // -1 lower, +1 upper
      for (Eigen::Index i = 0; i < k; ++i) {
        const double rate = -direction * delta[i];
        const Eigen::Index v = basis[i];
        double t;
        int to;
        if (rate > kPivotTol) {
          t = (upper[v] - x[v]) / rate;
          to = 1;
        } else if (rate < -kPivotTol) {
          t = (lower[v] - x[v]) / rate;
          to = -1;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        // Bland tie-break: among (near-)equal ratios keep the blocker with
        // the smallest variable index.
        if (t < basic_t - kPivotTol ||
            (t < basic_t + kPivotTol && leave >= 0 && v < basis[leave])) {
          basic_t = t;
          leave = i;
          leave_to = to;
        }
      }

      if (std::isinf(flip_t) && std::isinf(basic_t)) return false;  // unbounded

      if (flip_t <= basic_t) {
        // Entering variable travels to its opposite bound; basis unchanged.
        state[enter] = direction > 0 ? VarState::kAtUpper : VarState::kAtLower;
        continue;
      }
      const Eigen::Index out = basis[leave];
      state[out] = leave_to > 0 ? VarState::kAtUpper : VarState::kAtLower;
      x[enter] = (direction > 0 ? lower[enter] : upper[enter]) +
                 direction * basic_t;
      state[enter] = VarState::kBasic;
      basis[leave] = enter;
    }
  }
};

}  // namespace

LPProblem LPProblem::box01(Eigen::VectorXd objective, Eigen::MatrixXd eq_matrix,
                           Eigen::VectorXd eq_rhs) {
  LPProblem p;
  const Eigen::Index n = objective.size();
  p.objective = std::move(objective);
  p.eq_matrix = std::move(eq_matrix);
  p.eq_rhs = std::move(eq_rhs);
  p.lower = Eigen::VectorXd::Zero(n);
  p.upper = Eigen::VectorXd::Ones(n);
  return p;
}

LpSolution solve_lp(const LPProblem& problem, int max_iterations) {
  const Eigen::Index n = problem.objective.size();
  const Eigen::Index k = problem.eq_rhs.size();
  if (problem.eq_matrix.rows() != k ||
      (k > 0 && problem.eq_matrix.cols() != n)) {
    throw std::invalid_argument("LP constraint matrix shape mismatch");
  }
  if (problem.lower.size() != n || problem.upper.size() != n) {
    throw std::invalid_argument("LP bound vector size mismatch");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(problem.lower[j] <= problem.upper[j]) ||
        std::isinf(problem.lower[j])) {
      throw std::invalid_argument("LP bounds must satisfy finite lower <= upper");
    }
  }

  Solver s;
  s.k = k;
  s.n = n + k;  // one artificial per row
  s.A.resize(k, s.n);
  if (k > 0) s.A.leftCols(n) = problem.eq_matrix;
  s.b = problem.eq_rhs;
  s.lower.resize(s.n);
  s.upper.resize(s.n);
  s.lower.head(n) = problem.lower;
  s.upper.head(n) = problem.upper;
  s.x = Eigen::VectorXd::Zero(s.n);
  s.state.assign(static_cast<std::size_t>(s.n), VarState::kAtLower);

  // Phase 1: structural variables start at their lower bound and one
  // artificial per row absorbs the residual; minimize the total residual.
  Eigen::VectorXd residual = problem.eq_rhs;
  if (k > 0) residual -= problem.eq_matrix * problem.lower;
  for (Eigen::Index i = 0; i < k; ++i) {
    s.A.col(n + i) = Eigen::VectorXd::Unit(k, i) * (residual[i] < 0 ? -1.0 : 1.0);
    s.lower[n + i] = 0.0;
    s.upper[n + i] = kInf;
    s.basis.push_back(n + i);
    s.state[static_cast<std::size_t>(n + i)] = VarState::kBasic;
  }
  s.cost = Eigen::VectorXd::Zero(s.n);
  s.cost.tail(k).setConstant(-1.0);

  LpSolution solution;
  if (k > 0) {
    if (!s.run(max_iterations)) {
      throw std::runtime_error("phase-1 objective reported unbounded; " + s.basis_dump());
    }
    double art_sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) art_sum += s.x[n + i];
    if (art_sum > 1e-8) {
      solution.status = LpStatus::kInfeasible;
      solution.iterations = s.iterations;
      return solution;
    }
    // Any artificial still basic sits at zero; freeze it there for Phase 2.
    for (Eigen::Index i = 0; i < k; ++i) s.upper[n + i] = 0.0;
  }

  s.cost.setZero();
  s.cost.head(n) = problem.objective;
  const bool optimal = s.run(max_iterations);
  if (!optimal) {
    solution.status = LpStatus::kUnbounded;
    solution.iterations = s.iterations;
    return solution;
  }

  solution.status = LpStatus::kOptimal;
  solution.x = s.x.head(n);
  solution.objective = problem.objective.dot(solution.x);
  solution.iterations = s.iterations;
  if (k > 0) {
    solution.feasibility_residual =
        (problem.eq_matrix * solution.x - problem.eq_rhs).cwiseAbs().maxCoeff();
  }
  return solution;
}

}  // namespace soundshap
