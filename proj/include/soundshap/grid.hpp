#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace soundshap {

/// Hard cap on the feature count. Subsets are enumerated as bitmasks and
/// SHAP values sum over 2^(d-1) subsets, so larger d is rejected up front.
inline constexpr int kMaxFeatures = 20;

/// A grid cell, identified by one value index per feature.
using Cell = std::vector<int>;

/// Finite ordered value sets per feature. Functions and distributions are
/// tabulated on the cell lattice spanned by these values; all cell identity
/// goes through value indices, never raw float comparison.
class Grid {
 public:
  /// Each inner list must be nonempty and strictly increasing.
  explicit Grid(std::vector<std::vector<double>> feature_values);

  int dim() const { return static_cast<int>(feature_values_.size()); }
  int size(int feature) const;
  std::size_t num_cells() const { return num_cells_; }
  const std::vector<double>& values(int feature) const;

  /// Row-major flat index: feature 0 is the slowest axis, the last feature
  /// the fastest.
  std::size_t flat_index(const Cell& cell) const;
  Cell cell_at(std::size_t flat) const;

  /// Real coordinates of a cell.
  std::vector<double> cell_values(const Cell& cell) const;

  /// Index of `value` in feature's value list (exact match). Throws if the
  /// value is not on the grid.
  int value_index(int feature, double value) const;
  Cell cell_of_row(const std::vector<double>& row) const;

  bool operator==(const Grid& other) const {
    return feature_values_ == other.feature_values_;
  }

 private:
  std::vector<std::vector<double>> feature_values_;
  std::size_t num_cells_ = 1;
};

/// Subset S of [d] as a bitmask (bit i set <=> feature i in S).
class FeatureSubset {
 public:
  FeatureSubset(std::uint32_t bits, int dim);

  static FeatureSubset empty(int dim) { return {0u, dim}; }
  static FeatureSubset full(int dim);
  static FeatureSubset single(int feature, int dim);

  bool contains(int feature) const { return (bits_ >> feature) & 1u; }
  FeatureSubset with(int feature) const;
  FeatureSubset without(int feature) const;
  FeatureSubset complement() const;
  FeatureSubset intersect(const FeatureSubset& other) const;
  int count() const;

  std::uint32_t bits() const { return bits_; }
  int dim() const { return dim_; }

  bool operator==(const FeatureSubset& other) const {
    return bits_ == other.bits_ && dim_ == other.dim_;
  }

 private:
  std::uint32_t bits_;
  int dim_;
};

/// An n x d matrix of raw feature values.
struct Dataset {
  std::vector<std::vector<double>> rows;

  int dim() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
  std::size_t size() const { return rows.size(); }
};

}  // namespace soundshap
