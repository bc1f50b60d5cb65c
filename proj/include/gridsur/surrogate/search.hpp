#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridsur/dataset.hpp"
#include "gridsur/surrogate/model.hpp"

namespace gridsur {

/// Domain of one hyperparameter: either an explicit list of values or a
/// continuous/integer range (optionally log-uniform).
struct Domain {
  std::string name;
  std::vector<nlohmann::json> values;
  bool is_range = false;
  double lo = 0.0, hi = 0.0;
  bool log = false;
  bool integer = false;
};

struct HyperSpace {
  Family family = Family::ReLr;
  HyperParams base = LinearParams{};  // values for parameters without a domain
  std::vector<Domain> domains;

  /// Throws std::invalid_argument for empty domains, unknown names,
  /// non-integral integer domains or inverted ranges.
  void validate() const;
  [[nodiscard]] HyperParams sample(std::mt19937_64& rng) const;
  [[nodiscard]] std::size_t grid_size() const;  // 0 when any domain is a range
  [[nodiscard]] HyperParams grid_point(std::size_t index) const;
};

/// {"k": [1, 3, 5], "learning_rate": {"min": 1e-4, "max": 1e-2, "log": true}}
[[nodiscard]] HyperSpace hyper_space_from_json(Family family, const nlohmann::json& j,
                                               const HyperParams& base);
[[nodiscard]] HyperSpace hyper_space_from_json(Family family, const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const HyperSpace& space);

struct Trial {
  HyperParams params;
  double score = 0.0;  // mean fold RMSE, +inf when a fit failed
  std::vector<double> fold_rmse;
  std::string error;
};

struct SearchResult {
  HyperParams best;
  double best_score = 0.0;
  std::vector<Trial> trials;  // in evaluation order
};

/// Mean held-out RMSE over the folds. Fit seeds derive from (seed, month).
[[nodiscard]] Trial cross_validate(Family family, const HyperParams& hp,
                                   const ScenarioDataset& data, const std::vector<Fold>& folds,
                                   std::uint64_t seed);

/// Samples `budget` configurations and returns the lowest mean fold RMSE;
/// ties go to the earlier sample.
[[nodiscard]] SearchResult random_search_cv(const HyperSpace& space, const ScenarioDataset& data,
                                            const std::vector<Fold>& folds, int budget,
                                            std::uint64_t seed);

/// Exhaustive over the Cartesian product of list domains.
[[nodiscard]] SearchResult grid_search_cv(const HyperSpace& space, const ScenarioDataset& data,
                                          const std::vector<Fold>& folds, std::uint64_t seed = 0);

}  // namespace gridsur
