#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridsur/experiments.hpp"
#include "gridsur/grid.hpp"
#include "gridsur/profiles.hpp"

namespace gridsur {

/// Everything a reproducible run needs; loaded from one JSON file.
struct RunConfig {
  std::string grid = "cigre-lv-like";  // fixture name or grid JSON path
  std::uint64_t seed = 42;
  ReactiveMode reactive = ReactiveMode::ConstantPowerFactor;
  double cos_phi = 0.9;
  double tol_pu = 1e-8;
  int max_iter = 30;
  std::string dataset;  // optional pre-generated dataset CSV
  std::vector<ModelSpec> models;
  std::vector<int> tuning_months = {1, 4, 7, 10};
  int n_reps = 10;
  std::string out_dir = "out";
  int jobs = 1;
};

/// Missing keys take the defaults above; a missing "models" list means
/// default_models(). Paths are resolved relative to `base_dir`.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
[[nodiscard]] std::vector<ModelSpec> default_models();
[[nodiscard]] ModelSpec model_spec_from_json(const nlohmann::json& j);

[[nodiscard]] Grid resolve_grid(const std::string& grid);
[[nodiscard]] ProfileConfig profile_config(const RunConfig& cfg);
/// Loads cfg.dataset when set, otherwise synthesizes profiles and runs the
/// power flow for the whole year.
[[nodiscard]] ScenarioDataset obtain_dataset(const Grid& grid, const RunConfig& cfg, std::ostream& log);

/// Entry point behind the gridsur executable. Returns 0 on success, 1 on
/// usage errors and 2 on runtime errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridsur
