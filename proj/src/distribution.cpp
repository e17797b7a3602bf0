#include "soundshap/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace soundshap {

DiscreteDistribution::DiscreteDistribution(Grid grid, std::vector<double> mass)
    : grid_(std::move(grid)), mass_(std::move(mass)) {
  if (mass_.size() != grid_.num_cells()) {
    throw std::invalid_argument("mass vector size does not match grid cell count");
  }
  double total = 0.0;
  for (double m : mass_) {
    if (m < 0.0 || !std::isfinite(m)) {
      throw std::invalid_argument("cell masses must be finite and nonnegative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("cell masses sum to " + std::to_string(total) +
                                ", expected 1");
  }
}

std::pair<Grid, DiscreteDistribution> empirical_distribution(const Dataset& data) {
  if (data.rows.empty()) {
    throw std::invalid_argument("dataset is empty");
  }
  const int d = data.dim();
  if (d < 1) {
    throw std::invalid_argument("dataset rows are empty");
  }
  for (const auto& row : data.rows) {
    if (static_cast<int>(row.size()) != d) {
      throw std::invalid_argument("dataset rows have inconsistent widths");
    }
  }
  std::vector<std::vector<double>> feature_values(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col;
    col.reserve(data.rows.size());
    for (const auto& row : data.rows) col.push_back(row[j]);
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
    feature_values[j] = std::move(col);
  }
  Grid grid(std::move(feature_values));
  std::vector<double> mass(grid.num_cells(), 0.0);
  const double w = 1.0 / static_cast<double>(data.rows.size());
  for (const auto& row : data.rows) {
    mass[grid.flat_index(grid.cell_of_row(row))] += w;
  }
  DiscreteDistribution dist(grid, std::move(mass));
  return {std::move(grid), std::move(dist)};
}

std::vector<double> marginal(const DiscreteDistribution& dist, int feature) {
  const Grid& grid = dist.grid();
  if (feature < 0 || feature >= grid.dim()) {
    throw std::out_of_range("feature index out of range");
  }
  std::vector<double> out(grid.size(feature), 0.0);
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const double m = dist.mass()[flat];
    if (m == 0.0) continue;
    out[grid.cell_at(flat)[feature]] += m;
  }
  return out;
}

DiscreteDistribution extended_distribution(const DiscreteDistribution& dist) {
  const Grid& grid = dist.grid();
  std::vector<std::vector<double>> marginals(grid.dim());
  for (int j = 0; j < grid.dim(); ++j) marginals[j] = marginal(dist, j);
  std::vector<double> mass(grid.num_cells());
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const Cell cell = grid.cell_at(flat);
    double m = 1.0;
    for (int j = 0; j < grid.dim(); ++j) m *= marginals[j][cell[j]];
    mass[flat] = m;
  }
  // Renormalize away accumulated rounding so the constructor's sum check
  // stays exact under repeated extension.
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return {grid, std::move(mass)};
}

std::vector<bool> support_mask(const DiscreteDistribution& dist, double tol) {
  if (tol < 0.0) {
    throw std::invalid_argument("support tolerance must be nonnegative");
  }
  std::vector<bool> mask(dist.mass().size());
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = dist.mass()[k] > tol;
  return mask;
}

bool is_product_distribution(const DiscreteDistribution& dist, double tol) {
  const DiscreteDistribution star = extended_distribution(dist);
  for (std::size_t k = 0; k < dist.mass().size(); ++k) {
    if (std::abs(dist.mass()[k] - star.mass()[k]) > tol) return false;
  }
  return true;
}

}  // namespace soundshap
