#include "soundshap/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "soundshap/shap.hpp"

namespace soundshap {

namespace {

struct OperatorWorkspace {
  const DiscreteDistribution& dist;
  std::vector<std::size_t> basis;
  std::vector<Cell> cells;

  explicit OperatorWorkspace(const DiscreteDistribution& d)
      : dist(d), basis(extended_support_basis(d)) {
    cells.reserve(basis.size());
    for (std::size_t flat : basis) cells.push_back(d.grid().cell_at(flat));
  }
};

// Mixed-radix key of a cell projected onto the complement of s_bits.
std::size_t projection_key(const Grid& grid, const Cell& cell, std::uint32_t s_bits) {
  std::size_t key = 0;
  for (int j = 0; j < grid.dim(); ++j) {
    if ((s_bits >> j) & 1u) continue;
    key = key * static_cast<std::size_t>(grid.size(j)) +
          static_cast<std::size_t>(cell[j]);
  }
  return key;
}

Eigen::MatrixXd build_value_matrix(const OperatorWorkspace& ws, std::uint32_t s_bits) {
  const Grid& grid = ws.dist.grid();
  const auto m = static_cast<Eigen::Index>(ws.cells.size());

  // Marginal probability of the complement coordinates under the base
  // distribution, keyed by projection.
  std::unordered_map<std::size_t, double> proj_mass;
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const double p = ws.dist.mass()[flat];
    if (p == 0.0) continue;
    proj_mass[projection_key(grid, grid.cell_at(flat), s_bits)] += p;
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index b = 0; b < m; ++b) {
    const auto it = proj_mass.find(projection_key(grid, ws.cells[b], s_bits));
    if (it == proj_mass.end()) continue;
    const double p = it->second;
    const std::size_t in_key = projection_key(grid, ws.cells[b], ~s_bits);
    for (Eigen::Index a = 0; a < m; ++a) {
      if (projection_key(grid, ws.cells[a], ~s_bits) == in_key) M(a, b) = p;
    }
  }
  return M;
}

void require_same_grid(const DiscreteDistribution& dist, const TabularFunction& f) {
  if (!(dist.grid() == f.grid())) {
    throw std::invalid_argument("distribution and function live on different grids");
  }
}

void require_product(const DiscreteDistribution& dist, const char* what) {
  if (!is_product_distribution(dist)) {
    throw std::invalid_argument(std::string(what) +
                                " requires a product (extended) distribution");
  }
}

}  // namespace

std::vector<std::size_t> extended_support_basis(const DiscreteDistribution& dist) {
  const DiscreteDistribution star = extended_distribution(dist);
  std::vector<std::size_t> basis;
  for (std::size_t flat = 0; flat < star.mass().size(); ++flat) {
    if (star.mass()[flat] > 0.0) basis.push_back(flat);
  }
  return basis;
}

Eigen::VectorXd restrict_to_basis(const TabularFunction& f,
                                  const std::vector<std::size_t>& basis) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = f.at_flat(basis[k]);
  }
  return v;
}

TabularFunction expand_from_basis(const Grid& grid, const Eigen::VectorXd& vec,
                                  const std::vector<std::size_t>& basis,
                                  double fill) {
  if (static_cast<std::size_t>(vec.size()) != basis.size()) {
    throw std::invalid_argument("basis and vector sizes differ");
  }
  std::vector<double> values(grid.num_cells(), fill);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    values[basis[k]] = vec[static_cast<Eigen::Index>(k)];
  }
  return {grid, std::move(values)};
}

OperatorMatrix value_operator_matrix(const DiscreteDistribution& dist,
                                     const FeatureSubset& S) {
  if (S.dim() != dist.grid().dim()) {
    throw std::invalid_argument("subset dimension does not match grid");
  }
  OperatorWorkspace ws(dist);
  return {build_value_matrix(ws, S.bits()), std::move(ws.basis)};
}

ShapOperators shap_operator_matrices(const DiscreteDistribution& dist, int feature) {
  const int d = dist.grid().dim();
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  OperatorWorkspace ws(dist);
  const auto m = static_cast<Eigen::Index>(ws.cells.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  const std::uint32_t others = ~(1u << feature) & ((1u << d) - 1u);
  std::uint32_t s = others;
  for (;;) {
    const double w = 1.0 / (d * binomial(d - 1, std::popcount(s)));
    A += w * build_value_matrix(ws, s | (1u << feature));
    B += w * build_value_matrix(ws, s);
    if (s == 0) break;
    s = (s - 1) & others;
  }
  ShapOperators ops;
  ops.include_feature = {A, ws.basis};
  ops.exclude_feature = {B, ws.basis};
  ops.shap = {A - B, ws.basis};
  return ops;
}

SpectrumReport spectrum_check(const OperatorMatrix& A, int d) {
  if (d < 1) throw std::invalid_argument("feature count must be positive");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A.matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensolver did not converge");
  }
  SpectrumReport report;
  const auto& ev = solver.eigenvalues();
  report.min_real = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    report.eigenvalues.emplace_back(ev[k].real(), ev[k].imag());
    report.min_real = std::min(report.min_real, ev[k].real());
    report.max_imag_abs = std::max(report.max_imag_abs, std::abs(ev[k].imag()));
  }
  report.violation = report.min_real < 1.0 / d - 1e-8 || report.max_imag_abs > 1e-8;
  return report;
}

double hermitian_check(const DiscreteDistribution& dist_star, const FeatureSubset& S) {
  require_product(dist_star, "hermitian_check");
  OperatorWorkspace ws(dist_star);
  const Eigen::MatrixXd M = build_value_matrix(ws, S.bits());
  const auto m = static_cast<Eigen::Index>(ws.basis.size());
  Eigen::VectorXd mass(m);
  for (Eigen::Index k = 0; k < m; ++k) mass[k] = dist_star.mass()[ws.basis[k]];
  const Eigen::MatrixXd DM = mass.asDiagonal() * M;
  return (DM - DM.transpose()).cwiseAbs().maxCoeff();
}

DerivedSeriesReport derived_series(const DiscreteDistribution& dist, int max_level,
                                   double rank_tol) {
  const int d = dist.grid().dim();
  if (max_level < d + 1) {
    throw std::invalid_argument("max_level must be at least d+1");
  }
  OperatorWorkspace ws(dist);
  const auto m = static_cast<Eigen::Index>(ws.cells.size());
  if (m > 64) {
    throw std::invalid_argument("extended support too large for derived series (max 64 cells)");
  }
  constexpr int kGeneratorCap = 4096;

  std::vector<Eigen::MatrixXd> generators;
  for (std::uint32_t s = 0; s < (1u << d); ++s) {
    generators.push_back(build_value_matrix(ws, s));
  }

  DerivedSeriesReport report;
  for (int level = 0; level <= max_level; ++level) {
    // Drop numerically zero generators before the rank computation; the
    // relative pivot threshold alone cannot tell an all-noise column set
    // from a genuine one-dimensional span.
    Eigen::Index cols = 0;
    Eigen::MatrixXd stacked(m * m, static_cast<Eigen::Index>(generators.size()));
    for (const auto& g : generators) {
      Eigen::VectorXd col = Eigen::Map<const Eigen::VectorXd>(g.data(), m * m);
      if (col.norm() > rank_tol) stacked.col(cols++) = col;
    }
    if (cols == 0) {
      report.dims.push_back(0);
      report.vanish_level = level;
      return report;
    }
    stacked.conservativeResize(Eigen::NoChange, cols);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    qr.setThreshold(rank_tol);
    const auto rank = static_cast<Eigen::Index>(qr.rank());
    report.dims.push_back(static_cast<int>(rank));
    if (rank == 0) {
      report.vanish_level = level;
      return report;
    }
    if (level == max_level) break;

    const Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(m * m, rank);
    std::vector<Eigen::MatrixXd> basis;
    basis.reserve(static_cast<std::size_t>(rank));
    for (Eigen::Index k = 0; k < rank; ++k) {
      basis.emplace_back(Eigen::Map<const Eigen::MatrixXd>(Q.col(k).data(), m, m));
    }
    const auto num_pairs = static_cast<int>(rank * (rank - 1) / 2);
    if (num_pairs > kGeneratorCap) {
      throw std::runtime_error(
          "derived series dimension blow-up: level " + std::to_string(level) +
          " has rank " + std::to_string(rank) + " giving " +
          std::to_string(num_pairs) + " commutators (cap " +
          std::to_string(kGeneratorCap) + ")");
    }
    generators.clear();
    for (Eigen::Index a = 0; a < rank; ++a) {
      for (Eigen::Index b = a + 1; b < rank; ++b) {
        generators.push_back(basis[a] * basis[b] - basis[b] * basis[a]);
      }
    }
  }
  return report;
}

TabularFunction reconstruct_determined(const DiscreteDistribution& dist_star,
                                       const TabularFunction& f, int feature) {
  require_product(dist_star, "reconstruct_determined");
  require_same_grid(dist_star, f);
  const Grid& grid = dist_star.grid();
  const int d = grid.dim();
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  const ShapOperators ops = shap_operator_matrices(dist_star, feature);
  const auto& basis = ops.include_feature.basis;
  const auto m = static_cast<Eigen::Index>(basis.size());

  // Classes of extended-support cells that agree on everything except
  // `feature`; these index the collapsed grid that parameterizes the
  // reconstructed function.
  const std::uint32_t drop_bits = 1u << feature;
  std::unordered_map<std::size_t, Eigen::Index> class_of_key;
  std::vector<Eigen::Index> class_of_cell(basis.size());
  std::vector<Eigen::Index> representative;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const std::size_t key =
        projection_key(grid, grid.cell_at(basis[k]), drop_bits);
    auto [it, inserted] =
        class_of_key.try_emplace(key, static_cast<Eigen::Index>(representative.size()));
    if (inserted) representative.push_back(static_cast<Eigen::Index>(k));
    class_of_cell[k] = it->second;
  }
  const auto w = static_cast<Eigen::Index>(representative.size());

  // A restricted to the determined subspace, in the basis of class
  // indicator functions; each column is A applied to one indicator, read
  // off at the class representatives.
  Eigen::MatrixXd A_w(w, w);
  for (Eigen::Index c = 0; c < w; ++c) {
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (class_of_cell[static_cast<std::size_t>(k)] == c) ind[k] = 1.0;
    }
    const Eigen::VectorXd img = ops.include_feature.matrix * ind;
    for (Eigen::Index c2 = 0; c2 < w; ++c2) A_w(c2, c) = img[representative[c2]];
  }
  const Eigen::VectorXd Bf = ops.exclude_feature.matrix * restrict_to_basis(f, basis);
  Eigen::VectorXd rhs(w);
  for (Eigen::Index c = 0; c < w; ++c) rhs[c] = Bf[representative[c]];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A_w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()[w - 1];
  const double smax = svd.singularValues()[0];
  if (smin <= 0.0 || smax / smin > 1e12) {
    throw std::runtime_error("restricted reconstruction system is ill-conditioned");
  }
  const Eigen::VectorXd sol = svd.solve(rhs);

  // Values per class, expanded to the whole grid; a cell whose collapsed
  // coordinates fall outside every class (some other feature off-support)
  // gets 0.
  std::vector<double> values(grid.num_cells(), 0.0);
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const std::size_t key = projection_key(grid, grid.cell_at(flat), drop_bits);
    const auto it = class_of_key.find(key);
    if (it != class_of_key.end()) values[flat] = sol[it->second];
  }
  return {grid, std::move(values)};
}

std::pair<double, double> l1_l2_bound_check(const DiscreteDistribution& dist_star,
                                            const TabularFunction& f, int feature) {
  require_product(dist_star, "l1_l2_bound_check");
  require_same_grid(dist_star, f);
  const ShapOperators ops = shap_operator_matrices(dist_star, feature);
  const auto& basis = ops.shap.basis;
  const Eigen::VectorXd fv = restrict_to_basis(f, basis);
  for (Eigen::Index k = 0; k < fv.size(); ++k) {
    if (fv[k] < -1e-12 || fv[k] > 1.0 + 1e-12) {
      throw std::invalid_argument("function range must lie in [0,1] on the extended support");
    }
  }
  const Eigen::VectorXd phi = ops.shap.matrix * fv;
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double mass = dist_star.mass()[basis[k]];
    const double p = phi[static_cast<Eigen::Index>(k)];
    lhs += mass * p * p;
    rhs += mass * std::abs(p);
  }
  return {lhs, rhs};
}

}  // namespace soundshap
