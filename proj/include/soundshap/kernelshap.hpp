#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"

namespace soundshap {

enum class KernelShapMode {
  /// Draw subset/background pairs at random, as the regression is posed.
  kSampled,
  /// Replace the sampled average with the exact kernel-weighted,
  /// background-averaged sums. Deterministic; used by all verification paths.
  kFullEnumeration,
};

struct KernelShapConfig {
  KernelShapMode mode = KernelShapMode::kFullEnumeration;
  /// Number of subset draws in sampled mode; must be at least d.
  int num_subset_samples = 256;
  std::uint64_t rng_seed = 0;
  /// Subtract the mean of f before the regression. The outputs are invariant
  /// to constant shifts either way; the flag matters for the operator
  /// decomposition, whose algebra assumes a centered function.
  bool center_f = true;
};

struct KernelShapReport {
  std::vector<double> per_feature;
  KernelShapMode mode = KernelShapMode::kFullEnumeration;
  /// f(x) - mean(f); the per-feature values sum to this by construction.
  double sum_target = 0.0;
};

/// The subset-sampling distribution over all 2^d bitmasks: proportional to
/// (d-1) / (C(d,|S|) * |S| * (d-|S|)) for 0 < |S| < d, zero on the empty and
/// full subsets. Requires d >= 2.
std::vector<double> pi_weights(int d);

struct SubsetMomentMatrix {
  Eigen::MatrixXd matrix;  // exact enumeration of E[1_S 1_S^t]
  double p = 0.0;          // diagonal minus off-diagonal, read off the matrix
  double q = 0.0;          // off-diagonal entry
  /// The published closed-form values, recorded for comparison only; the
  /// enumerated matrix is the ground truth (see subset_moment_matrix docs).
  double p_closed_form = 0.0;
  double q_closed_form = 0.0;
};

/// M = sum_S pi(S) 1_S 1_S^t by exact enumeration, with p, q read off the
/// matrix. The closed-form q published for this matrix disagrees with the
/// enumeration at d >= 3 (enumeration gives 1/6 off-diagonal at d = 3); both
/// values are reported, nothing asserts their equality.
SubsetMomentMatrix subset_moment_matrix(int d);

/// Constrained weighted least squares at point x with background data X.
/// Sampled mode pairs the j-th subset draw with row (j mod n); full
/// enumeration averages every subset over all rows.
KernelShapReport kernelshap_point(const Dataset& X, const TabularFunction& f,
                                  const std::vector<double>& x,
                                  const KernelShapConfig& cfg);

/// The large-sample limit: the same closed form with exact subset
/// expectations and exact value functions under `dist`.
KernelShapReport kernelshap_limit(const DiscreteDistribution& dist,
                                  const TabularFunction& f, const Cell& x);

/// Independently permute each column. Preserves every column multiset and
/// turns a sample of a distribution into a sample of its extended
/// distribution. Deterministic given the seed.
Dataset scramble_columns(const Dataset& X, std::uint64_t seed);

/// Mean of |K_feature| over the rows of X, each row explained with X itself
/// as background.
double aggregate_kernelshap(const Dataset& X, const TabularFunction& f,
                            int feature, const KernelShapConfig& cfg);

/// Worst-feature gap between the empirical aggregate on X_star and the exact
/// limit aggregate under dist_star.
double aggregate_limit_gap(const Dataset& X_star, const DiscreteDistribution& dist_star,
                    const TabularFunction& f, const KernelShapConfig& cfg);

struct KernelOperatorDecomposition {
  /// Coefficient per subset bitmask expressing the limit operator of one
  /// feature as a combination of value operators.
  std::vector<double> coefficients;
  int feature = 0;
  /// Worst mismatch between the operator combination and the limit closed
  /// form over the verification functions.
  double max_reconstruction_residual = 0.0;
  double p = 0.0;
  double q = 0.0;
  double p_closed_form = 0.0;
  double q_closed_form = 0.0;
};

/// Expresses the KernelSHAP limit operator for one feature as a weighted sum
/// of value operators over dist_star, and verifies the expression against the
/// closed form on random centered functions. Throws if the reconstruction
/// residual exceeds 1e-9.
KernelOperatorDecomposition kernel_operator_decomposition(const DiscreteDistribution& dist_star,
                                     int feature, int num_check_functions = 20,
                                     std::uint64_t seed = 0);

}  // namespace soundshap
