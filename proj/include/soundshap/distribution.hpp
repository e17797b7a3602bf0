#pragma once

#include <utility>
#include <vector>

#include "soundshap/grid.hpp"

namespace soundshap {

/// Probability mass per grid cell, stored row-major.
class DiscreteDistribution {
 public:
  /// Masses must be nonnegative and sum to 1 within 1e-12.
  DiscreteDistribution(Grid grid, std::vector<double> mass);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& mass() const { return mass_; }
  double mass_at(const Cell& cell) const { return mass_[grid_.flat_index(cell)]; }
  double mass_at_flat(std::size_t flat) const { return mass_.at(flat); }

 private:
  Grid grid_;
  std::vector<double> mass_;
};

/// Grid from the sorted distinct column values, mass = row count / n.
std::pair<Grid, DiscreteDistribution> empirical_distribution(const Dataset& data);

/// Marginal mass vector of one feature. Entry k is the total mass of cells
/// whose coordinate index for `feature` equals k.
std::vector<double> marginal(const DiscreteDistribution& dist, int feature);

/// Product of the per-feature marginals. Idempotent.
DiscreteDistribution extended_distribution(const DiscreteDistribution& dist);

/// Cellwise mass > tol.
std::vector<bool> support_mask(const DiscreteDistribution& dist, double tol = 0.0);

/// True when extended_distribution(dist) reproduces dist within tol.
bool is_product_distribution(const DiscreteDistribution& dist, double tol = 1e-9);

}  // namespace soundshap
