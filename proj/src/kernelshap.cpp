#include "soundshap/kernelshap.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "soundshap/operators.hpp"
#include "soundshap/rng.hpp"
#include "soundshap/shap.hpp"

namespace soundshap {

namespace {

Eigen::VectorXd indicator(std::uint32_t bits, int d) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    if ((bits >> j) & 1u) e[j] = 1.0;
  }
  return e;
}

// Closed-form p/q as published for the subset moment matrix. Recorded for
// diagnostics; enumeration is the working value.
std::pair<double, double> closed_form_pq(int d) {
  double num = 0.0;
  for (int k = 2; k <= d - 1; ++k) num += static_cast<double>(d - 1) / (d - k);
  double den = 0.0;
  for (int k = 1; k <= d - 1; ++k) den += 1.0 / (static_cast<double>(k) * (d - k));
  const double q = d > 2 ? num / (d * (d - 1.0) * den) : 0.0;
  return {0.5 - q, q};
}

// Shared closed form: K = M^{-1}(b - 1 * (1^t M^{-1} b - target) / (1^t M^{-1} 1)),
// where target = f(x) - base. The sum constraint holds by construction.
Eigen::VectorXd solve_constrained(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                  double target, const char* singular_hint) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) {
    throw std::runtime_error(singular_hint);
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
  const Eigen::VectorXd Minv_b = lu.solve(b);
  const Eigen::VectorXd Minv_1 = lu.solve(ones);
  const double shift = (ones.dot(Minv_b) - target) / ones.dot(Minv_1);
  return Minv_b - shift * Minv_1;
}

std::vector<Cell> rows_to_cells(const Dataset& X, const Grid& grid) {
  std::vector<Cell> cells;
  cells.reserve(X.rows.size());
  for (const auto& row : X.rows) cells.push_back(grid.cell_of_row(row));
  return cells;
}

double combined_eval(const TabularFunction& f, const Cell& x, const Cell& bg,
                     std::uint32_t s_bits) {
  Cell z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    z[j] = ((s_bits >> j) & 1u) ? x[j] : bg[j];
  }
  return f.at(z);
}

void require_kernel_dim(int d) {
  if (d < 2) {
    throw std::invalid_argument(
        "KernelSHAP needs at least 2 features; the subset kernel is undefined otherwise");
  }
}

}  // namespace

std::vector<double> pi_weights(int d) {
  require_kernel_dim(d);
  std::vector<double> w(std::size_t{1} << d, 0.0);
  double total = 0.0;
  for (std::uint32_t s = 1; s + 1 < w.size(); ++s) {
    const int k = std::popcount(s);
    w[s] = (d - 1.0) / (binomial(d, k) * k * (d - k));
    total += w[s];
  }
  for (double& v : w) v /= total;
  return w;
}

SubsetMomentMatrix subset_moment_matrix(int d) {
  const std::vector<double> pw = pi_weights(d);
  SubsetMomentMatrix report;
  report.matrix = Eigen::MatrixXd::Zero(d, d);
  for (std::uint32_t s = 0; s < pw.size(); ++s) {
    if (pw[s] == 0.0) continue;
    const Eigen::VectorXd e = indicator(s, d);
    report.matrix += pw[s] * e * e.transpose();
  }
  report.p = report.matrix(0, 0) - report.matrix(0, 1);
  report.q = report.matrix(0, 1);
  std::tie(report.p_closed_form, report.q_closed_form) = closed_form_pq(d);
  return report;
}

KernelShapReport kernelshap_point(const Dataset& X, const TabularFunction& f,
                                  const std::vector<double>& x,
                                  const KernelShapConfig& cfg) {
  const Grid& grid = f.grid();
  const int d = grid.dim();
  require_kernel_dim(d);
  if (X.rows.empty()) throw std::invalid_argument("background dataset is empty");
  if (X.dim() != d) {
    throw std::invalid_argument("dataset width does not match the function grid");
  }
  const std::vector<Cell> bg = rows_to_cells(X, grid);
  const Cell xc = grid.cell_of_row(x);
  const auto n = static_cast<double>(bg.size());

  double fbar = 0.0;
  for (const Cell& c : bg) fbar += f.at(c);
  fbar /= n;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  if (cfg.mode == KernelShapMode::kSampled) {
    if (cfg.num_subset_samples < d) {
      throw std::invalid_argument("sampled mode needs at least d subset samples");
    }
    const std::vector<double> pw = pi_weights(d);
    std::vector<double> cumulative(pw.size());
    std::uint32_t last_positive = 0;
    double acc = 0.0;
    for (std::size_t s = 0; s < pw.size(); ++s) {
      acc += pw[s];
      cumulative[s] = acc;
      if (pw[s] > 0.0) last_positive = static_cast<std::uint32_t>(s);
    }
    SplitMix64 rng(cfg.rng_seed);
    const double wj = 1.0 / cfg.num_subset_samples;
    for (int j = 0; j < cfg.num_subset_samples; ++j) {
      const double u = rng.next_double();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto s = it == cumulative.end()
                         ? last_positive
                         : static_cast<std::uint32_t>(it - cumulative.begin());
      const Eigen::VectorXd e = indicator(s, d);
      M += wj * e * e.transpose();
      const Cell& row = bg[static_cast<std::size_t>(j) % bg.size()];
      b += wj * e * (combined_eval(f, xc, row, s) - fbar);
    }
  } else {
    const std::vector<double> pw = pi_weights(d);
    for (std::uint32_t s = 0; s < pw.size(); ++s) {
      if (pw[s] == 0.0) continue;
      const Eigen::VectorXd e = indicator(s, d);
      M += pw[s] * e * e.transpose();
      double vbar = 0.0;
      for (const Cell& row : bg) vbar += combined_eval(f, xc, row, s);
      vbar /= n;
      b += pw[s] * e * (vbar - fbar);
    }
  }

  KernelShapReport report;
  report.mode = cfg.mode;
  report.sum_target = f.at(xc) - fbar;
  const Eigen::VectorXd k = solve_constrained(
      M, b, report.sum_target,
      "subset moment matrix is singular; draw more subset samples");
  report.per_feature.assign(k.data(), k.data() + d);
  return report;
}

KernelShapReport kernelshap_limit(const DiscreteDistribution& dist,
                                  const TabularFunction& f, const Cell& x) {
  const Grid& grid = dist.grid();
  const int d = grid.dim();
  require_kernel_dim(d);
  if (!(grid == f.grid())) {
    throw std::invalid_argument("distribution and function live on different grids");
  }
  const std::vector<double> pw = pi_weights(d);
  const double v0 = value_function(dist, f, x, FeatureSubset::empty(d));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (std::uint32_t s = 0; s < pw.size(); ++s) {
    if (pw[s] == 0.0) continue;
    const double vs = value_function(dist, f, x, FeatureSubset(s, d));
    b += pw[s] * (vs - v0) * indicator(s, d);
  }
  KernelShapReport report;
  report.mode = KernelShapMode::kFullEnumeration;
  report.sum_target = f.at(x) - v0;
  const Eigen::VectorXd k =
      solve_constrained(subset_moment_matrix(d).matrix, b, report.sum_target,
                        "subset moment matrix is singular");
  report.per_feature.assign(k.data(), k.data() + d);
  return report;
}

Dataset scramble_columns(const Dataset& X, std::uint64_t seed) {
  Dataset out = X;
  if (X.rows.empty()) return out;
  const int d = X.dim();
  const std::size_t n = X.rows.size();
  SplitMix64 root(seed);
  for (int j = 0; j < d; ++j) {
    SplitMix64 column_rng = root.split(static_cast<std::uint64_t>(j));
    const std::vector<std::size_t> perm = random_permutation(n, column_rng);
    for (std::size_t r = 0; r < n; ++r) {
      out.rows[r][static_cast<std::size_t>(j)] =
          X.rows[perm[r]][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

double aggregate_kernelshap(const Dataset& X, const TabularFunction& f,
                            int feature, const KernelShapConfig& cfg) {
  const int d = f.grid().dim();
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  SplitMix64 root(cfg.rng_seed);
  double total = 0.0;
  for (std::size_t r = 0; r < X.rows.size(); ++r) {
    KernelShapConfig point_cfg = cfg;
    // Independent stream per evaluation point.
    point_cfg.rng_seed = root.split(r).next();
    const KernelShapReport rep = kernelshap_point(X, f, X.rows[r], point_cfg);
    total += std::abs(rep.per_feature[static_cast<std::size_t>(feature)]);
  }
  return total / static_cast<double>(X.rows.size());
}

double aggregate_limit_gap(const Dataset& X_star, const DiscreteDistribution& dist_star,
                    const TabularFunction& f, const KernelShapConfig& cfg) {
  const Grid& grid = f.grid();
  const int d = grid.dim();
  require_kernel_dim(d);
  if (!(grid == dist_star.grid())) {
    throw std::invalid_argument("distribution and function live on different grids");
  }
  if (!is_product_distribution(dist_star)) {
    throw std::invalid_argument("aggregate_limit_gap requires the extended (product) distribution");
  }

  std::vector<double> empirical(d, 0.0);
  SplitMix64 root(cfg.rng_seed);
  for (std::size_t r = 0; r < X_star.rows.size(); ++r) {
    KernelShapConfig point_cfg = cfg;
    point_cfg.rng_seed = root.split(r).next();
    const KernelShapReport rep = kernelshap_point(X_star, f, X_star.rows[r], point_cfg);
    for (int i = 0; i < d; ++i) empirical[i] += std::abs(rep.per_feature[i]);
  }
  for (double& v : empirical) v /= static_cast<double>(X_star.rows.size());

  std::vector<double> exact(d, 0.0);
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const double mass = dist_star.mass()[flat];
    if (mass == 0.0) continue;
    const KernelShapReport rep = kernelshap_limit(dist_star, f, grid.cell_at(flat));
    for (int i = 0; i < d; ++i) exact[i] += mass * std::abs(rep.per_feature[i]);
  }

  double gap = 0.0;
  for (int i = 0; i < d; ++i) gap = std::max(gap, std::abs(empirical[i] - exact[i]));
  return gap;
}

KernelOperatorDecomposition kernel_operator_decomposition(const DiscreteDistribution& dist_star,
                                     int feature, int num_check_functions,
                                     std::uint64_t seed) {
  const Grid& grid = dist_star.grid();
  const int d = grid.dim();
  require_kernel_dim(d);
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  if (!is_product_distribution(dist_star)) {
    throw std::invalid_argument("kernel_operator_decomposition requires the extended (product) distribution");
  }

  const SubsetMomentMatrix mm = subset_moment_matrix(d);
  const double p = mm.p;
  const double q = mm.q;
  const std::vector<double> pw = pi_weights(d);

  KernelOperatorDecomposition out;
  out.feature = feature;
  out.p = p;
  out.q = q;
  out.p_closed_form = mm.p_closed_form;
  out.q_closed_form = mm.q_closed_form;
  out.coefficients.assign(pw.size(), 0.0);
  const std::uint32_t full = static_cast<std::uint32_t>(pw.size()) - 1u;
  for (std::uint32_t s = 0; s < pw.size(); ++s) {
    if (s == full) {
      out.coefficients[s] = 1.0 / d;
      continue;
    }
    const int size = std::popcount(s);
    const double common = size * pw[s] / (d * (p + d * q));
    if ((s >> feature) & 1u) {
      out.coefficients[s] = (1.0 / p - q * size / (p * (p + d * q))) * pw[s] - common;
    } else {
      out.coefficients[s] = -(q * size / (p * (p + d * q))) * pw[s] - common;
    }
  }

  // Verify the expression against the limit closed form on random centered
  // functions over the extended support.
  const std::vector<std::size_t> basis = extended_support_basis(dist_star);
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd K_op = Eigen::MatrixXd::Zero(m, m);
  for (std::uint32_t s = 0; s < pw.size(); ++s) {
    if (out.coefficients[s] == 0.0) continue;
    K_op += out.coefficients[s] * value_operator_matrix(dist_star, FeatureSubset(s, d)).matrix;
  }

  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < num_check_functions; ++t) {
    Eigen::VectorXd fv(m);
    for (Eigen::Index k = 0; k < m; ++k) fv[k] = rng.next_double();
    double mean = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      mean += dist_star.mass()[basis[static_cast<std::size_t>(k)]] * fv[k];
    }
    fv.array() -= mean;
    const TabularFunction fc = expand_from_basis(grid, fv, basis);
    const Eigen::VectorXd recon = K_op * fv;
    for (Eigen::Index k = 0; k < m; ++k) {
      const KernelShapReport rep =
          kernelshap_limit(dist_star, fc, grid.cell_at(basis[static_cast<std::size_t>(k)]));
      worst = std::max(worst,
                       std::abs(recon[k] - rep.per_feature[static_cast<std::size_t>(feature)]));
    }
  }
  out.max_reconstruction_residual = worst;
  if (worst > 1e-9) {
    throw std::runtime_error(
        "value-operator decomposition disagrees with the KernelSHAP limit (residual " +
        std::to_string(worst) + ")");
  }
  return out;
}

}  // namespace soundshap
