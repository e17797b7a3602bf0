#include "soundshap/grid.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace soundshap {

Grid::Grid(std::vector<std::vector<double>> feature_values)
    : feature_values_(std::move(feature_values)) {
  if (feature_values_.empty()) {
    throw std::invalid_argument("grid needs at least one feature");
  }
  if (dim() > kMaxFeatures) {
    throw std::invalid_argument("grid has " + std::to_string(dim()) +
                                " features; the limit is " +
                                std::to_string(kMaxFeatures));
  }
  for (const auto& vals : feature_values_) {
    if (vals.empty()) {
      throw std::invalid_argument("every feature needs at least one value");
    }
    for (std::size_t k = 1; k < vals.size(); ++k) {
      if (!(vals[k - 1] < vals[k])) {
        throw std::invalid_argument("feature values must be strictly increasing");
      }
    }
    num_cells_ *= vals.size();
  }
}

int Grid::size(int feature) const {
  return static_cast<int>(values(feature).size());
}

const std::vector<double>& Grid::values(int feature) const {
  if (feature < 0 || feature >= dim()) {
    throw std::out_of_range("feature index out of range");
  }
  return feature_values_[feature];
}

std::size_t Grid::flat_index(const Cell& cell) const {
  if (static_cast<int>(cell.size()) != dim()) {
    throw std::invalid_argument("cell dimension does not match grid");
  }
  std::size_t flat = 0;
  for (int j = 0; j < dim(); ++j) {
    const int k = cell[j];
    if (k < 0 || k >= size(j)) {
      throw std::out_of_range("cell index out of range for feature " +
                              std::to_string(j));
    }
    flat = flat * feature_values_[j].size() + static_cast<std::size_t>(k);
  }
  return flat;
}

Cell Grid::cell_at(std::size_t flat) const {
  if (flat >= num_cells_) {
    throw std::out_of_range("flat cell index out of range");
  }
  Cell cell(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    const std::size_t n = feature_values_[j].size();
    cell[j] = static_cast<int>(flat % n);
    flat /= n;
  }
  return cell;
}

std::vector<double> Grid::cell_values(const Cell& cell) const {
  std::vector<double> out(dim());
  for (int j = 0; j < dim(); ++j) {
    out[j] = values(j).at(static_cast<std::size_t>(cell[j]));
  }
  return out;
}

int Grid::value_index(int feature, double value) const {
  const auto& vals = values(feature);
  const auto it = std::lower_bound(vals.begin(), vals.end(), value);
  if (it == vals.end() || *it != value) {
    throw std::invalid_argument("value " + std::to_string(value) +
                                " is not on the grid for feature " +
                                std::to_string(feature));
  }
  return static_cast<int>(it - vals.begin());
}

Cell Grid::cell_of_row(const std::vector<double>& row) const {
  if (static_cast<int>(row.size()) != dim()) {
    throw std::invalid_argument("row dimension does not match grid");
  }
  Cell cell(dim());
  for (int j = 0; j < dim(); ++j) {
    cell[j] = value_index(j, row[j]);
  }
  return cell;
}

FeatureSubset::FeatureSubset(std::uint32_t bits, int dim) : bits_(bits), dim_(dim) {
  if (dim < 1 || dim > kMaxFeatures) {
    throw std::invalid_argument("subset dimension out of range");
  }
  if (bits >= (1u << dim)) {
    throw std::invalid_argument("subset bits exceed 2^d");
  }
}

FeatureSubset FeatureSubset::full(int dim) {
  return {static_cast<std::uint32_t>((1u << dim) - 1u), dim};
}

FeatureSubset FeatureSubset::single(int feature, int dim) {
  if (feature < 0 || feature >= dim) {
    throw std::out_of_range("feature index out of range");
  }
  return {1u << feature, dim};
}

FeatureSubset FeatureSubset::with(int feature) const {
  if (feature < 0 || feature >= dim_) {
    throw std::out_of_range("feature index out of range");
  }
  return {bits_ | (1u << feature), dim_};
}

FeatureSubset FeatureSubset::without(int feature) const {
  if (feature < 0 || feature >= dim_) {
    throw std::out_of_range("feature index out of range");
  }
  return {bits_ & ~(1u << feature), dim_};
}

FeatureSubset FeatureSubset::complement() const {
  return {~bits_ & ((1u << dim_) - 1u), dim_};
}

FeatureSubset FeatureSubset::intersect(const FeatureSubset& other) const {
  return {bits_ & other.bits_, dim_};
}

int FeatureSubset::count() const { return std::popcount(bits_); }

}  // namespace soundshap
