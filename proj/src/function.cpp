#include "soundshap/function.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace soundshap {

TabularFunction::TabularFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.num_cells()) {
    throw std::invalid_argument("value vector size does not match grid cell count");
  }
}

DeterminedCheck is_determined(const TabularFunction& f, const FeatureSubset& S,
                              const std::vector<bool>& mask, double tol) {
  const Grid& grid = f.grid();
  if (mask.size() != grid.num_cells()) {
    throw std::invalid_argument("mask size does not match grid cell count");
  }
  if (S.dim() != grid.dim()) {
    throw std::invalid_argument("subset dimension does not match grid");
  }
  // Group masked cells by their S-coordinates; f must be constant (within
  // tol) inside each group.
  std::unordered_map<std::size_t, std::pair<double, double>> groups;  // key -> (min, max)
  bool any = false;
  for (std::size_t flat = 0; flat < mask.size(); ++flat) {
    if (!mask[flat]) continue;
    any = true;
    const Cell cell = grid.cell_at(flat);
    std::size_t key = 0;
    for (int j = 0; j < grid.dim(); ++j) {
      if (!S.contains(j)) continue;
      key = key * static_cast<std::size_t>(grid.size(j)) +
            static_cast<std::size_t>(cell[j]);
    }
    const double v = f.at_flat(flat);
    auto [it, inserted] = groups.try_emplace(key, v, v);
    if (!inserted) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
  if (!any) {
    return {true, true};
  }
  for (const auto& [key, span] : groups) {
    if (span.second - span.first > tol) return {false, false};
  }
  return {true, false};
}

TabularFunction constant_function(const Grid& grid, double c) {
  return {grid, std::vector<double>(grid.num_cells(), c)};
}

TabularFunction additive_function(const Grid& grid) {
  std::vector<double> values(grid.num_cells());
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    double s = 0.0;
    for (double v : grid.cell_values(grid.cell_at(flat))) s += v;
    values[flat] = s;
  }
  return {grid, std::move(values)};
}

TabularFunction product_function(const Grid& grid) {
  std::vector<double> values(grid.num_cells());
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    double p = 1.0;
    for (double v : grid.cell_values(grid.cell_at(flat))) p *= v;
    values[flat] = p;
  }
  return {grid, std::move(values)};
}

TabularFunction indicator_function(const Grid& grid, std::size_t flat_cell) {
  if (flat_cell >= grid.num_cells()) {
    throw std::out_of_range("indicator cell index out of range");
  }
  std::vector<double> values(grid.num_cells(), 0.0);
  values[flat_cell] = 1.0;
  return {grid, std::move(values)};
}

}  // namespace soundshap
