#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "gridsur/surrogate/params.hpp"

namespace gridsur {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrainingMeta {
  std::uint64_t seed = 0;
  int fold = 0;  // held-out month, 0 when trained on everything
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fitted multi-target regressor. Instances exist only as the result of a
/// fit (or deserialization) and are immutable afterwards.
class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;

  [[nodiscard]] virtual Family family() const = 0;
  [[nodiscard]] virtual HyperParams hyper_params() const = 0;
  [[nodiscard]] Index input_dim() const { return input_dim_; }
  [[nodiscard]] Index output_dim() const { return output_dim_; }

  /// Rows of `x` are observations. Throws std::invalid_argument on a
  /// column count other than input_dim().
  [[nodiscard]] Matrix predict(const Matrix& x) const;

  /// Single observation, no allocation in the hot path for most families.
  virtual void predict_row(std::span<const double> x, std::span<double> out) const = 0;

  [[nodiscard]] virtual nlohmann::json parameters_json() const = 0;

  TrainingMeta meta;

 protected:
  SurrogateModel(Index input_dim, Index output_dim)
      : input_dim_(input_dim), output_dim_(output_dim) {}

  virtual Matrix predict_batch(const Matrix& x) const;
  void check_row(std::span<const double> x, std::span<double> out) const;

 private:
  Index input_dim_;
  Index output_dim_;
};

using SurrogatePtr = std::unique_ptr<SurrogateModel>;

/// Uniform fit entry point; dispatches on family.
[[nodiscard]] SurrogatePtr fit_surrogate(Family family, const HyperParams& hp,
                                         const Matrix& x, const Matrix& y,
                                         std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON blob (family, hyperparameters, parameters, standardizers).
[[nodiscard]] nlohmann::json serialize_model(const SurrogateModel& model);
[[nodiscard]] SurrogatePtr deserialize_model(const nlohmann::json& blob);

}  // namespace gridsur
