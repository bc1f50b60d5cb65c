#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gridsur/surrogate/model.hpp"

namespace gridsur {

class MlpDivergence : public FitError {
 public:
  explicit MlpDivergence(int epoch);
  [[nodiscard]] int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Trunk widths interpolated geometrically from the input to the output
/// size, one per hidden layer.
[[nodiscard]] std::vector<Index> trunk_widths(Index inputs, Index outputs, int hidden_layers);

/// Feed-forward network: a dense trunk followed by one head stack per
/// output. With task_specific_layers == 0 the trunk feeds a dense linear
/// output layer. All weights live in one flat vector.
class MlpNetwork {
 public:
  MlpNetwork(Index inputs, Index outputs, const MlpParams& hp);

  void initialize(std::uint64_t seed);

  [[nodiscard]] Vector& parameters() { return params_; }
  [[nodiscard]] const Vector& parameters() const { return params_; }
  [[nodiscard]] Index inputs() const { return inputs_; }
  [[nodiscard]] Index outputs() const { return outputs_; }

  /// Rows are samples. Dropout is never applied here.
  [[nodiscard]] Matrix forward(const Matrix& x) const;

  /// Mean squared error over all entries of the batch and its gradient
  /// with respect to parameters(). Dropout masks are drawn from `rng` when
  /// given and dropout > 0.
  double loss_and_gradient(const Matrix& x, const Matrix& y, Vector& grad,
                           std::mt19937_64* rng = nullptr) const;

 private:
  enum class Kind { Dense, Block, BlockOut };
  struct Layer {
    Kind kind;
    Index in, out;  // total widths
    Index blocks;   // heads for Block/BlockOut
    Index w_offset, b_offset;
    bool hidden;    // activation + dropout follow
  };
  Matrix apply(const Layer& l, const Matrix& a) const;
  void activate(Matrix& z) const;

  Index inputs_, outputs_;
  MlpParams hp_;
  std::vector<Layer> layers_;
  Vector params_;
};

[[nodiscard]] SurrogatePtr fit_mlp(const Matrix& x, const Matrix& y, const MlpParams& hp,
                                   std::uint64_t seed);

[[nodiscard]] SurrogatePtr mlp_from_json(const MlpParams& hp, const nlohmann::json& params);

}  // namespace gridsur
