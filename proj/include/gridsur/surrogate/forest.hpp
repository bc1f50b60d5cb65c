#pragma once

#include <cstdint>
#include <vector>

#include "gridsur/surrogate/model.hpp"

namespace gridsur {

/// Flat CART regression tree. Leaves have feature == -1.
struct RegressionTree {
  std::vector<int> feature;
  std::vector<double> threshold;  // go left when x[feature] <= threshold
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  [[nodiscard]] double predict(std::span<const double> x) const;
  [[nodiscard]] std::size_t nodes() const { return feature.size(); }
  bool operator==(const RegressionTree&) const = default;
};

/// Grows one tree on the given rows of x against target column y.
[[nodiscard]] RegressionTree grow_tree(const Matrix& x, const Eigen::Ref<const Vector>& y,
                                       std::vector<Index> rows, int mtry, int nodesize,
                                       std::uint64_t seed);

/// Per-target random forest. Deterministic in seed for any worker count.
[[nodiscard]] SurrogatePtr fit_random_forest(const Matrix& x, const Matrix& y,
                                             const ForestParams& hp, std::uint64_t seed);

[[nodiscard]] SurrogatePtr forest_from_json(const ForestParams& hp, const nlohmann::json& params);

}  // namespace gridsur
