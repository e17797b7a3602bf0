#pragma once

#include <vector>

#include "soundshap/distribution.hpp"
#include "soundshap/grid.hpp"

namespace soundshap {

/// One real value per grid cell, stored row-major.
class TabularFunction {
 public:
  TabularFunction(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double at(const Cell& cell) const { return values_[grid_.flat_index(cell)]; }
  double at_flat(std::size_t flat) const { return values_.at(flat); }

 private:
  Grid grid_;
  std::vector<double> values_;
};

struct DeterminedCheck {
  bool determined = false;
  /// Set when the mask was empty; the check is then vacuously true.
  bool vacuous = false;
};

/// Whether f depends only on the coordinates in S over the masked cells:
/// for all masked a, b with a_S = b_S, |f(a) - f(b)| <= tol. With S empty
/// this is a constant-on-mask check.
DeterminedCheck is_determined(const TabularFunction& f, const FeatureSubset& S,
                              const std::vector<bool>& mask, double tol);

/// Named function families the CLI tabulates on a grid.
TabularFunction constant_function(const Grid& grid, double c);
TabularFunction additive_function(const Grid& grid);   // sum of coordinates
TabularFunction product_function(const Grid& grid);    // product of coordinates
TabularFunction indicator_function(const Grid& grid, std::size_t flat_cell);

}  // namespace soundshap
