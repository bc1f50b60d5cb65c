#pragma once

#include <span>

#include <Eigen/Dense>

#include "json.hpp"

namespace gridsur {

/// Per-column z-scoring fitted on training data. Zero-variance columns map
/// to 0 instead of NaN and invert back to their mean.
class Standardizer {
 public:
  Standardizer() = default;
  static Standardizer fit(const Eigen::MatrixXd& x);

  [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd& z) const;
  void transform_row(std::span<const double> x, std::span<double> z) const;

  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::VectorXd& scale() const { return scale_; }
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

  [[nodiscard]] nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

  bool operator==(const Standardizer& other) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;      // sample standard deviation; 0 for constants
  Eigen::VectorXd inv_scale_;  // 1/scale, 0 for constants
};

}  // namespace gridsur
