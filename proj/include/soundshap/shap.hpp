#pragma once

#include <vector>

#include "soundshap/distribution.hpp"
#include "soundshap/function.hpp"
#include "soundshap/grid.hpp"

namespace soundshap {

/// Pointwise SHAP values of every feature at one cell, plus the base value
/// v_empty = E[f]. Efficiency holds by construction: the per-feature values
/// sum to f(x) - base_value.
struct ShapReport {
  Cell point;
  std::vector<double> per_feature;
  double base_value = 0.0;
};

/// Interventional value function: the exact sum of mass(X) * f(x_S, X_{S^c})
/// over the support of `dist`.
double value_function(const DiscreteDistribution& dist, const TabularFunction& f,
                      const Cell& x, const FeatureSubset& S);

/// SHAP value of feature i at x by full subset enumeration.
double shap_value(const DiscreteDistribution& dist, const TabularFunction& f,
                  const Cell& x, int feature);

/// All d SHAP values at x, sharing one value-function pass per subset.
ShapReport shap_all(const DiscreteDistribution& dist, const TabularFunction& f,
                    const Cell& x);

/// Mean absolute SHAP value: sum over x of weight(x) * |phi_i(value_dist, f, x)|.
/// The weighting measure and the measure inside the SHAP value are separate
/// because both combinations are needed (aggregation over the data support
/// with data-support SHAP values, and the all-extended variant).
double aggregate_shap(const DiscreteDistribution& weight_dist,
                      const DiscreteDistribution& value_dist,
                      const TabularFunction& f, int feature);

/// Binomial coefficient from a precomputed Pascal triangle; exact for the
/// supported feature counts.
double binomial(int n, int k);

}  // namespace soundshap
