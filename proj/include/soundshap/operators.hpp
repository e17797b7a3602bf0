#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"

namespace soundshap {

/// Dense linear map on functions restricted to the extended support. `basis`
/// lists the flat grid indices of the extended-support cells, in ascending
/// order; row/column k of `matrix` corresponds to basis[k].
struct OperatorMatrix {
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> basis;
};

struct ShapOperators {
  /// Weighted sum of value operators whose subset contains the feature.
  OperatorMatrix include_feature;
  /// Same with the subsets excluding it.
  OperatorMatrix exclude_feature;
  /// Their difference; applying it to f gives the feature's SHAP values.
  OperatorMatrix shap;
};

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double min_real = 0.0;
  double max_imag_abs = 0.0;
  /// Set when min_real < 1/d - 1e-8 or max_imag_abs > 1e-8.
  bool violation = false;
};

struct DerivedSeriesReport {
  /// Subspace dimension at each derivation level, starting from the span of
  /// the value operators.
  std::vector<int> dims;
  std::optional<int> vanish_level;
};

/// Flat indices of the extended-support cells of `dist`.
std::vector<std::size_t> extended_support_basis(const DiscreteDistribution& dist);

/// f restricted to the given basis cells, as a vector.
Eigen::VectorXd restrict_to_basis(const TabularFunction& f,
                                  const std::vector<std::size_t>& basis);

/// Expand a basis vector back to a full-grid function; cells outside the
/// basis get `fill`.
TabularFunction expand_from_basis(const Grid& grid, const Eigen::VectorXd& vec,
                                  const std::vector<std::size_t>& basis,
                                  double fill = 0.0);

/// Matrix of the value operator for subset S over the extended support:
/// entry[x][y] = 1(y_S = x_S) * Pr[X_{S^c} = y_{S^c}]. Row-stochastic and
/// idempotent.
OperatorMatrix value_operator_matrix(const DiscreteDistribution& dist,
                                     const FeatureSubset& S);

/// The SHAP operator triple for one feature, as binomially weighted sums of
/// value operators.
ShapOperators shap_operator_matrices(const DiscreteDistribution& dist, int feature);

/// Dense eigensolve of an A-type operator; flags eigenvalues that violate
/// the lower bound 1/d or carry a nonnegligible imaginary part.
SpectrumReport spectrum_check(const OperatorMatrix& A, int d);

/// Max asymmetry of diag(mass) * M_S, which is symmetric exactly when the
/// value operator is Hermitian under the mass-weighted inner product.
/// Requires a product distribution.
double hermitian_check(const DiscreteDistribution& dist_star, const FeatureSubset& S);

/// Numerical derived series of the span of the value operators: level k+1 is
/// the span of pairwise commutators of an orthonormal basis of level k.
/// Solvability predicts a vanish level of at most d+1.
DerivedSeriesReport derived_series(const DiscreteDistribution& dist, int max_level,
                                   double rank_tol = 1e-9);

/// The determined-function reconstruction: solves the A-operator system
/// restricted to the subspace of functions constant along `feature`, with
/// right-hand side B applied to f. The result ignores `feature` over the
/// extended support and is close to f whenever the aggregate SHAP value of
/// `feature` under the extended distribution is small.
TabularFunction reconstruct_determined(const DiscreteDistribution& dist_star,
                                       const TabularFunction& f, int feature);

/// (sum mass*(Phi f)^2, sum mass*|Phi f|) over the extended support, for f
/// with range in [0,1]; the first never exceeds the second.
std::pair<double, double> l1_l2_bound_check(const DiscreteDistribution& dist_star,
                                            const TabularFunction& f, int feature);

}  // namespace soundshap
