#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridsur/dataset.hpp"
#include "gridsur/grid.hpp"
#include "gridsur/stats.hpp"
#include "gridsur/surrogate/model.hpp"
#include "gridsur/surrogate/search.hpp"

namespace gridsur {

/// Adequate-accuracy threshold on the yearly mean RMSE, in pu.
inline constexpr double kRmseThreshold = 1e-3;

/// Root mean squared error over every entry of the two matrices.
[[nodiscard]] double rmse(const Matrix& y, const Matrix& yhat);
[[nodiscard]] inline bool meets_threshold(double yearly_rmse) {
  return yearly_rmse <= kRmseThreshold;
}

enum class Tuner { None, Random, Grid };

struct ModelSpec {
  std::string name;  // report label
  Family family = Family::ReLr;
  HyperParams params = LinearParams{};  // used as is when tuner == None
  Tuner tuner = Tuner::None;
  std::optional<HyperSpace> space;
  int budget = 20;
};

struct ModelAccuracy {
  std::string name;
  Family family = Family::ReLr;
  HyperParams params = LinearParams{};
  double tuning_score = 0.0;           // NaN when not tuned
  std::vector<double> fold_rmse;       // Jan..Dec, NaN for failed folds
  std::vector<std::string> fold_error;
  std::vector<double> bus_rmse;        // pooled out-of-fold
  std::map<std::string, double> subgrid_rmse;
  double yearly_rmse = 0.0;            // mean of fold RMSEs
  bool pass = false;
};

struct AccuracyReport {
  std::vector<std::string> bus_labels;
  std::vector<ModelAccuracy> models;
};

struct AccuracyOptions {
  std::uint64_t seed = 42;
  /// Held-out months scored during tuning.
  std::vector<int> tuning_months = {1, 4, 7, 10};
};

/// Tunes each model once, then fits on 11 months and scores the held-out
/// month for every month of the year. Fit failures are recorded per fold.
[[nodiscard]] AccuracyReport run_accuracy_experiment(const Grid& grid, const ScenarioDataset& data,
                                                     const std::vector<ModelSpec>& models,
                                                     const AccuracyOptions& opts = {});

/// A surrogate to time; a null model stands for the simulation model.
struct TimedModel {
  std::string name;
  const SurrogateModel* model = nullptr;
  double rmse = std::numeric_limits<double>::quiet_NaN();
};

struct ContenderTiming {
  std::string name;
  bool simulation = false;
  std::vector<double> seconds;
  double mean = 0.0;
  double stddev = 0.0;
  double suf = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
};

struct NormalityResult {
  std::string group;
  std::optional<TestResult> test;
  std::string error;
};

struct PairwiseResult {
  std::string a, b;
  TestResult test;
  double p_adjusted = 1.0;
  bool significant = false;
};

struct StatsBattery {
  double alpha = 0.05;
  int comparisons = 0;
  double alpha_adjusted = 0.05;
  TestResult levene;
  std::vector<NormalityResult> shapiro;
  TestResult anova;
  std::vector<PairwiseResult> pairs;
};

struct TimingReport {
  int n_reps = 0;
  std::size_t steps = 0;
  std::vector<ContenderTiming> contenders;  // simulation model first
  std::optional<StatsBattery> stats;
};

struct TimingOptions {
  int n_reps = 10;
  SolverOptions solver;
  double alpha = 0.05;
};

/// Times a full sweep over every dataset row for the simulation model and
/// each surrogate, n_reps times, serially. One untimed warm-up per contender.
[[nodiscard]] TimingReport run_timing_experiment(const Grid& grid, const ScenarioDataset& data,
                                                 const std::vector<TimedModel>& models,
                                                 const TimingOptions& opts = {});

/// mean(t_sim) / mean(t_sur).
[[nodiscard]] double speedup_factor(std::span<const double> t_sim, std::span<const double> t_sur);

[[nodiscard]] StatsBattery run_stats_battery(const TimingReport& timing, double alpha = 0.05);

enum class ReportFormat { Csv, Json, Markdown };

[[nodiscard]] ReportFormat parse_report_format(std::string_view s);
[[nodiscard]] std::string emit_report(const AccuracyReport& report, ReportFormat format);
[[nodiscard]] std::string emit_report(const TimingReport& report, ReportFormat format);
/// Combined table with the columns Model, RMSE, Calc. [s], StD., SUF.
[[nodiscard]] std::string emit_summary(const AccuracyReport* accuracy, const TimingReport* timing);

[[nodiscard]] AccuracyReport accuracy_report_from_json(const nlohmann::json& j);
[[nodiscard]] TimingReport timing_report_from_json(const nlohmann::json& j);

}  // namespace gridsur
