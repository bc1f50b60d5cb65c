#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace gridsur {

/// Surrogate model families.
enum class Family {
  ReLr,  // regressor ensemble of linear regressions
  RcLr,  // regressor chain of linear regressions
  ReRf,  // regressor ensemble of random forests
  Knn,   // k-nearest neighbours
  Mlp,   // feed-forward network with task-specific heads
};

[[nodiscard]] std::string_view to_string(Family f);
[[nodiscard]] std::string_view display_name(Family f);
[[nodiscard]] Family parse_family(std::string_view s);

struct LinearParams {
  double ridge = 0.0;
  /// With ridge == 0, exactly collinear input columns are an error unless
  /// this is set, in which case dependent columns get zero coefficients.
  bool drop_dependent = false;
  /// Chain order (RC only); empty means target index order.
  std::vector<int> chain_order;

  bool operator==(const LinearParams&) const = default;
};

struct ForestParams {
  int mtry = 1;
  double sample_size = 1.0;  // fraction of training rows drawn per tree
  bool replace = true;
  int nodesize = 5;          // minimum observations in a terminal node
  int n_trees = 50;

  bool operator==(const ForestParams&) const = default;
};

enum class Weighting { Uniform, InverseDistance };

struct KnnParams {
  int k = 5;
  Weighting weighting = Weighting::Uniform;

  bool operator==(const KnnParams&) const = default;
};

enum class Activation { Relu, Tanh, Sigmoid };

struct MlpParams {
  int epochs = 30;
  int hidden_layers = 2;
  int batch_size = 64;
  Activation activation = Activation::Tanh;
  double dropout = 0.0;
  int task_specific_layers = 1;
  int head_width = 4;
  double learning_rate = 1e-3;

  bool operator==(const MlpParams&) const = default;
};

using HyperParams = std::variant<LinearParams, ForestParams, KnnParams, MlpParams>;

/// Throws std::invalid_argument when the parameter type does not belong to
/// the family.
void check_family(Family f, const HyperParams& hp);

[[nodiscard]] nlohmann::json to_json(const HyperParams& hp);
[[nodiscard]] HyperParams hyper_params_from_json(Family f, const nlohmann::json& j);
[[nodiscard]] std::string describe(const HyperParams& hp);

[[nodiscard]] std::string_view to_string(Weighting w);
[[nodiscard]] std::string_view to_string(Activation a);
[[nodiscard]] Weighting parse_weighting(std::string_view s);
[[nodiscard]] Activation parse_activation(std::string_view s);

}  // namespace gridsur
