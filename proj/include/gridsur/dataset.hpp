#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsur/grid.hpp"
#include "gridsur/power_flow.hpp"
#include "gridsur/profiles.hpp"

namespace gridsur {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct DatasetMeta {
  std::uint64_t grid_hash = 0;
  std::uint64_t profile_seed = 0;
  std::string reactive_mode = "constant";
  double cos_phi = 0.9;
  double tol_pu = 1e-8;
  int max_iter = 30;
  /// Target values outside the (0.5, 1.5) pu sanity envelope.
  std::size_t out_of_envelope = 0;
};

/// Supervised data for one simulated year: raw attachment P/Q as inputs,
/// every bus voltage magnitude as targets.
struct ScenarioDataset {
  std::vector<std::string> input_columns;   // "<label>.p", "<label>.q", ...
  std::vector<std::string> target_columns;  // "bus<i>.vm_pu"
  Matrix inputs;                            // T x d, MW / Mvar
  Matrix targets;                           // T x m, pu
  std::vector<int> month;                   // 1..12 per row
  DatasetMeta meta;

  [[nodiscard]] Index rows() const { return inputs.rows(); }
};

class DatasetError : public std::runtime_error {
 public:
  DatasetError(int step, const std::string& what)
      : std::runtime_error("timestep " + std::to_string(step) + ": " + what),
        step_(step) {}
  [[nodiscard]] int step() const { return step_; }

 private:
  int step_;
};

struct DatasetOptions {
  SolverOptions solver;
  int jobs = 1;
  ProfileConfig profile_config;  // recorded in the metadata only
};

/// Input row (P, Q interleaved per attachment) at step t.
[[nodiscard]] Vector attachment_powers(const Grid& grid,
                                       const ProfileSet& profiles, int step);

/// One simulation-model step: injections from an input row, Newton-Raphson,
/// bus voltage magnitudes out.
[[nodiscard]] Vector simulate_step(const Grid& grid, const AdmittanceMatrix& y,
                                   const Eigen::Ref<const Vector>& input_row,
                                   const SolverOptions& opts);

/// Runs the power flow for every step of the year. Rows come out in step
/// order regardless of `jobs`. Throws DatasetError naming the first failing
/// step.
[[nodiscard]] ScenarioDataset generate_dataset(const Grid& grid,
                                               const ProfileSet& profiles,
                                               const DatasetOptions& opts = {});

struct Fold {
  int month = 0;
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Leave-one-calendar-month-out splits, January first.
[[nodiscard]] std::vector<Fold> monthly_folds(const ScenarioDataset& dataset);

[[nodiscard]] Matrix select_rows(const Matrix& m, const std::vector<Index>& rows);

/// Writes `<path>` and the sidecar `<stem>.meta.json`.
void write_dataset(const ScenarioDataset& dataset, const std::string& csv_path);
[[nodiscard]] ScenarioDataset read_dataset(const std::string& csv_path);
[[nodiscard]] std::string dataset_to_csv(const ScenarioDataset& dataset);
[[nodiscard]] std::string sidecar_path(const std::string& csv_path);

}  // namespace gridsur
