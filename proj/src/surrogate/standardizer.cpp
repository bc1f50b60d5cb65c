#include "gridsur/surrogate/standardizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridsur {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw std::invalid_argument("cannot standardize an empty matrix");
  Standardizer s;
  s.mean_ = x.colwise().mean().transpose();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  s.scale_ = ((x.rowwise() - s.mean_.transpose()).array().square().colwise().sum() / denom)
                 .sqrt()
                 .transpose();
  s.inv_scale_.resize(s.scale_.size());
  for (Eigen::Index c = 0; c < s.scale_.size(); ++c) {
    // Columns constant up to rounding count as constant.
    const double tiny = 1e-12 * std::max(1.0, std::abs(s.mean_[c]));
    if (!(s.scale_[c] > tiny)) s.scale_[c] = 0.0;
    s.inv_scale_[c] = s.scale_[c] > 0.0 ? 1.0 / s.scale_[c] : 0.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != dim()) throw std::invalid_argument("standardizer: column count mismatch");
  return (x.rowwise() - mean_.transpose()).array().rowwise() * inv_scale_.transpose().array();
}

Eigen::MatrixXd Standardizer::inverse(const Eigen::MatrixXd& z) const {
  if (z.cols() != dim()) throw std::invalid_argument("standardizer: column count mismatch");
  return (z.array().rowwise() * scale_.transpose().array()).rowwise() +
         mean_.transpose().array();
}

void Standardizer::transform_row(std::span<const double> x, std::span<double> z) const {
  for (Eigen::Index c = 0; c < dim(); ++c) z[c] = (x[c] - mean_[c]) * inv_scale_[c];
}

bool Standardizer::operator==(const Standardizer& o) const {
  return mean_.size() == o.mean_.size() && mean_ == o.mean_ && scale_ == o.scale_;
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
          {"scale", std::vector<double>(scale_.data(), scale_.data() + scale_.size())}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  if (mean.size() != scale.size()) throw std::invalid_argument("standardizer size mismatch");
  Standardizer s;
  s.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.scale_ = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  s.inv_scale_ = s.scale_.unaryExpr([](double v) { return v > 0.0 ? 1.0 / v : 0.0; });
  return s;
}

}  // namespace gridsur
