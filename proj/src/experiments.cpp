#include "gridsur/experiments.hpp"

#include <chrono>
#include <cmath>

#include "gridsur/parallel.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double rmse(const Matrix& y, const Matrix& yhat) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols())
    throw std::invalid_argument("rmse: shape mismatch (" + std::to_string(y.rows()) + "x" +
                                std::to_string(y.cols()) + " vs " + std::to_string(yhat.rows()) +
                                "x" + std::to_string(yhat.cols()) + ")");
  if (y.size() == 0) throw std::invalid_argument("rmse: empty matrices");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

namespace {

HyperParams tune(const ModelSpec& spec, const ScenarioDataset& data,
                 const std::vector<Fold>& folds, std::uint64_t seed, double& score) {
  score = kNaN;
  if (spec.tuner == Tuner::None || !spec.space) return spec.params;
  const SearchResult r = spec.tuner == Tuner::Grid
                             ? grid_search_cv(*spec.space, data, folds, seed)
                             : random_search_cv(*spec.space, data, folds, spec.budget, seed);
  score = r.best_score;
  return r.best;
}

}  // namespace

AccuracyReport run_accuracy_experiment(const Grid& grid, const ScenarioDataset& data,
                                       const std::vector<ModelSpec>& models,
                                       const AccuracyOptions& opts) {
  AccuracyReport report;
  report.bus_labels = data.target_columns;
  if (models.empty()) return report;
  if (static_cast<std::size_t>(data.targets.cols()) != grid.buses.size())
    throw std::invalid_argument("dataset targets do not match the grid's bus count");

  const std::vector<Fold> folds = monthly_folds(data);
  std::vector<Fold> tuning_folds;
  for (int month : opts.tuning_months) {
    if (month < 1 || month > 12) throw std::invalid_argument("tuning month out of range");
    tuning_folds.push_back(folds[static_cast<std::size_t>(month - 1)]);
  }
  if (tuning_folds.empty()) tuning_folds = folds;

  std::map<std::string, std::vector<Index>> subgrids;
  for (std::size_t b = 0; b < grid.buses.size(); ++b)
    subgrids[grid.buses[b].subgrid.value_or("unlabelled")].push_back(static_cast<Index>(b));

  for (const auto& spec : models) {
    ModelAccuracy acc;
    acc.name = spec.name;
    acc.family = spec.family;
    const std::uint64_t model_seed = derive_seed(opts.seed, spec.name);
    try {
      acc.params = tune(spec, data, tuning_folds, derive_seed(model_seed, "tune"), acc.tuning_score);
    } catch (const std::exception& e) {
      acc.params = spec.params;
      acc.fold_rmse.assign(12, kNaN);
      acc.fold_error.assign(12, std::string("tuning failed: ") + e.what());
      acc.yearly_rmse = kNaN;
      report.models.push_back(std::move(acc));
      continue;
    }

    Matrix oof = Matrix::Constant(data.targets.rows(), data.targets.cols(), kNaN);
    acc.fold_rmse.assign(12, kNaN);
    acc.fold_error.assign(12, "");
    parallel_for(12, [&](int k) {
      const Fold& fold = folds[static_cast<std::size_t>(k)];
      try {
        const auto model = fit_surrogate(
            spec.family, acc.params, select_rows(data.inputs, fold.train),
            select_rows(data.targets, fold.train),
            derive_seed(model_seed, {static_cast<std::uint64_t>(fold.month)}));
        const Matrix pred = model->predict(select_rows(data.inputs, fold.test));
        acc.fold_rmse[static_cast<std::size_t>(k)] = rmse(select_rows(data.targets, fold.test), pred);
        for (std::size_t i = 0; i < fold.test.size(); ++i) oof.row(fold.test[i]) = pred.row(static_cast<Index>(i));
      } catch (const std::exception& e) {
        acc.fold_error[static_cast<std::size_t>(k)] = e.what();
      }
    });

    double sum = 0.0;
    for (double v : acc.fold_rmse) sum += v;
    acc.yearly_rmse = sum / 12.0;
    acc.pass = std::isfinite(acc.yearly_rmse) && meets_threshold(acc.yearly_rmse);

    // Pooled per-bus and per-subgrid errors over rows whose fold succeeded.
    std::vector<Index> rows;
    for (Index r = 0; r < oof.rows(); ++r)
      if (!std::isnan(oof(r, 0))) rows.push_back(r);
    acc.bus_rmse.assign(static_cast<std::size_t>(oof.cols()), kNaN);
    if (!rows.empty()) {
      const Matrix err = select_rows(oof, rows) - select_rows(data.targets, rows);
      const auto n = static_cast<double>(rows.size());
      for (Index b = 0; b < err.cols(); ++b)
        acc.bus_rmse[static_cast<std::size_t>(b)] = std::sqrt(err.col(b).squaredNorm() / n);
      for (const auto& [label, buses] : subgrids) {
        double s = 0.0;
        for (Index b : buses) s += err.col(b).squaredNorm();
        acc.subgrid_rmse[label] = std::sqrt(s / (n * static_cast<double>(buses.size())));
      }
    }
    report.models.push_back(std::move(acc));
  }
  return report;
}

double speedup_factor(std::span<const double> t_sim, std::span<const double> t_sur) {
  if (t_sim.empty() || t_sur.empty()) throw std::invalid_argument("speedup_factor: empty time list");
  for (double t : t_sim)
    if (!(t > 0.0)) throw std::invalid_argument("speedup_factor: times must be > 0");
  for (double t : t_sur)
    if (!(t > 0.0)) throw std::invalid_argument("speedup_factor: times must be > 0");
  return mean(t_sim) / mean(t_sur);
}

TimingReport run_timing_experiment(const Grid& grid, const ScenarioDataset& data,
                                   const std::vector<TimedModel>& models,
                                   const TimingOptions& opts) {
  if (opts.n_reps < 2) throw std::invalid_argument("timing needs n_reps >= 2");
  const RowMatrix inputs = data.inputs;
  const Index steps = inputs.rows();
  const AdmittanceMatrix ybus = build_ybus(grid);
  for (const auto& m : models)
    if (m.model && m.model->input_dim() != inputs.cols())
      throw std::invalid_argument("model '" + m.name + "' does not match the dataset inputs");

  std::vector<TimedModel> contenders{{"Sim", nullptr, 0.0}};
  contenders.insert(contenders.end(), models.begin(), models.end());

  // One full-year sweep. The checksum keeps the work observable.
  auto sweep = [&](const TimedModel& c) {
    double checksum = 0.0;
    if (!c.model) {
      for (Index t = 0; t < steps; ++t)
        checksum += simulate_step(grid, ybus, inputs.row(t).transpose(), opts.solver).sum();
    } else {
      std::vector<double> out(static_cast<std::size_t>(c.model->output_dim()));
      const auto d = static_cast<std::size_t>(inputs.cols());
      for (Index t = 0; t < steps; ++t) {
        c.model->predict_row({inputs.row(t).data(), d}, out);
        checksum += out[0];
      }
    }
    return checksum;
  };

  TimingReport report;
  report.n_reps = opts.n_reps;
  report.steps = static_cast<std::size_t>(steps);
  volatile double sink = 0.0;
  for (const auto& c : contenders) sink = sink + sweep(c);
  std::vector<std::vector<double>> times(contenders.size());
  for (int rep = 0; rep < opts.n_reps; ++rep) {
    for (std::size_t i = 0; i < contenders.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      sink = sink + sweep(contenders[i]);
      const auto t1 = std::chrono::steady_clock::now();
      times[i].push_back(std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9));
    }
  }

  for (std::size_t i = 0; i < contenders.size(); ++i) {
    ContenderTiming ct;
    ct.name = contenders[i].name;
    ct.simulation = contenders[i].model == nullptr;
    ct.seconds = times[i];
    ct.mean = mean(ct.seconds);
    ct.stddev = std::sqrt(variance(ct.seconds));
    ct.suf = ct.simulation ? 1.0 : speedup_factor(times[0], ct.seconds);
    ct.rmse = ct.simulation ? 0.0 : contenders[i].rmse;
    report.contenders.push_back(std::move(ct));
  }
  report.stats = run_stats_battery(report, opts.alpha);
  return report;
}

StatsBattery run_stats_battery(const TimingReport& timing, double alpha) {
  const auto& cs = timing.contenders;
  if (cs.size() < 2) throw std::invalid_argument("stats battery needs at least 2 groups");
  std::vector<Sample> groups;
  for (const auto& c : cs) {
    if (c.seconds.size() < 2) throw std::invalid_argument("each group needs at least 2 samples");
    groups.push_back(c.seconds);
  }
  StatsBattery s;
  s.alpha = alpha;
  const auto g = static_cast<int>(groups.size());
  s.comparisons = g * (g - 1) / 2;
  s.alpha_adjusted = alpha / s.comparisons;
  s.levene = levene(groups);
  s.anova = anova_oneway(groups);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    NormalityResult nr;
    nr.group = cs[i].name;
    try {
      nr.test = shapiro_wilk(groups[i]);
    } catch (const std::exception& e) {
      nr.error = e.what();
    }
    s.shapiro.push_back(std::move(nr));
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseResult p;
      p.a = cs[i].name;
      p.b = cs[j].name;
      p.test = welch_t(groups[i], groups[j]);
      p.p_adjusted = bonferroni_adjust(std::span<const double>(&p.test.p_value, 1), s.comparisons)[0];
      p.significant = p.p_adjusted < alpha;
      s.pairs.push_back(std::move(p));
    }
  }
  return s;
}

}  // namespace gridsur
