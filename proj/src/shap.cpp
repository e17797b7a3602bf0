#include "soundshap/shap.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace soundshap {

namespace {

// Cells with positive mass, as (flat index, cell, mass).
struct SupportPoint {
  Cell cell;
  double mass;
};

std::vector<SupportPoint> support_points(const DiscreteDistribution& dist) {
  std::vector<SupportPoint> pts;
  const Grid& grid = dist.grid();
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const double m = dist.mass()[flat];
    if (m > 0.0) pts.push_back({grid.cell_at(flat), m});
  }
  return pts;
}

double value_function_impl(const std::vector<SupportPoint>& support,
                           const TabularFunction& f, const Cell& x,
                           std::uint32_t s_bits) {
  const int d = static_cast<int>(x.size());
  double total = 0.0;
  Cell z(d);
  for (const auto& pt : support) {
    for (int j = 0; j < d; ++j) {
      z[j] = ((s_bits >> j) & 1u) ? x[j] : pt.cell[j];
    }
    total += pt.mass * f.at(z);
  }
  return total;
}

void check_inputs(const DiscreteDistribution& dist, const TabularFunction& f,
                  const Cell& x) {
  if (!(dist.grid() == f.grid())) {
    throw std::invalid_argument("distribution and function live on different grids");
  }
  // Validates the cell against the grid.
  (void)dist.grid().flat_index(x);
}

}  // namespace

double binomial(int n, int k) {
  static const auto table = [] {
    std::vector<std::vector<double>> t(kMaxFeatures + 1);
    for (int row = 0; row <= kMaxFeatures; ++row) {
      t[row].assign(row + 1, 1.0);
      for (int col = 1; col < row; ++col) {
        t[row][col] = t[row - 1][col - 1] + t[row - 1][col];
      }
    }
    return t;
  }();
  if (n < 0 || n > kMaxFeatures || k < 0 || k > n) {
    throw std::out_of_range("binomial arguments out of range");
  }
  return table[n][k];
}

double value_function(const DiscreteDistribution& dist, const TabularFunction& f,
                      const Cell& x, const FeatureSubset& S) {
  check_inputs(dist, f, x);
  if (S.dim() != dist.grid().dim()) {
    throw std::invalid_argument("subset dimension does not match grid");
  }
  return value_function_impl(support_points(dist), f, x, S.bits());
}

double shap_value(const DiscreteDistribution& dist, const TabularFunction& f,
                  const Cell& x, int feature) {
  check_inputs(dist, f, x);
  const int d = dist.grid().dim();
  if (feature < 0 || feature >= d) {
    throw std::out_of_range("feature index out of range");
  }
  const auto support = support_points(dist);
  const std::uint32_t others = ~(1u << feature) & ((1u << d) - 1u);
  double total = 0.0;
  // Enumerate S over subsets of [d] \ {feature} by walking sub-bitmasks.
  std::uint32_t s = others;
  for (;;) {
    const int size = std::popcount(s);
    const double w = 1.0 / (d * binomial(d - 1, size));
    const double with_i = value_function_impl(support, f, x, s | (1u << feature));
    const double without_i = value_function_impl(support, f, x, s);
    total += w * (with_i - without_i);
    if (s == 0) break;
    s = (s - 1) & others;
  }
  return total;
}

ShapReport shap_all(const DiscreteDistribution& dist, const TabularFunction& f,
                    const Cell& x) {
  check_inputs(dist, f, x);
  const int d = dist.grid().dim();
  const auto support = support_points(dist);
  // One value-function evaluation per subset, shared by all d features.
  std::vector<double> v(std::size_t{1} << d);
  for (std::uint32_t s = 0; s < v.size(); ++s) {
    v[s] = value_function_impl(support, f, x, s);
  }
  ShapReport report;
  report.point = x;
  report.base_value = v[0];
  report.per_feature.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    const std::uint32_t others = ~(1u << i) & ((1u << d) - 1u);
    double total = 0.0;
    std::uint32_t s = others;
    for (;;) {
      const double w = 1.0 / (d * binomial(d - 1, std::popcount(s)));
      total += w * (v[s | (1u << i)] - v[s]);
      if (s == 0) break;
      s = (s - 1) & others;
    }
    report.per_feature[i] = total;
  }
  return report;
}

double aggregate_shap(const DiscreteDistribution& weight_dist,
                      const DiscreteDistribution& value_dist,
                      const TabularFunction& f, int feature) {
  if (!(weight_dist.grid() == value_dist.grid()) ||
      !(weight_dist.grid() == f.grid())) {
    throw std::invalid_argument("aggregate_shap inputs live on different grids");
  }
  const Grid& grid = weight_dist.grid();
  double total = 0.0;
  for (std::size_t flat = 0; flat < grid.num_cells(); ++flat) {
    const double w = weight_dist.mass()[flat];
    if (w == 0.0) continue;
    total += w * std::abs(shap_value(value_dist, f, grid.cell_at(flat), feature));
  }
  return total;
}

}  // namespace soundshap
