#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridsur/experiments.hpp"
#include "gridsur/surrogate/linear.hpp"

using namespace gridsur;
using nlohmann::json;

namespace {

// A CIGRE-shaped dataset with a known linear response and a little noise.
ScenarioDataset cigre_shaped(int per_month, std::uint64_t seed) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.02);
  std::normal_distribution<double> noise(0.0, 2e-4);
  const Index n = 12 * per_month, d = 30, m = 44;
  Matrix w(d, m);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < m; ++j) w(i, j) = j == 0 ? 0.0 : -0.2 * u(rng) * 50;
  ScenarioDataset ds;
  ds.inputs.resize(n, d);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < d; ++c) ds.inputs(r, c) = u(rng);
  ds.targets = (ds.inputs * w).array() + 1.0;
  for (Index r = 0; r < n; ++r) {
    ds.month.push_back(static_cast<int>(r / per_month) + 1);
    for (Index j = 1; j < m; ++j) ds.targets(r, j) += noise(rng);
  }
  for (std::size_t i = 0; i < g.attachments.size(); ++i) {
    ds.input_columns.push_back(g.attachment_label(i) + ".p");
    ds.input_columns.push_back(g.attachment_label(i) + ".q");
  }
  for (Index j = 0; j < m; ++j) ds.target_columns.push_back("bus" + std::to_string(j) + ".vm_pu");
  return ds;
}

std::vector<ModelSpec> small_specs() {
  ModelSpec lr{"RE LR", Family::ReLr, LinearParams{}, Tuner::None, std::nullopt, 1};
  ModelSpec knn{"k-NN", Family::Knn, KnnParams{}, Tuner::Grid,
                hyper_space_from_json(Family::Knn, json::parse(R"({"k": [1, 3, 9]})")), 1};
  return {lr, knn};
}

TimingReport synthetic_timing(int groups, int reps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  TimingReport t;
  t.n_reps = reps;
  for (int g = 0; g < groups; ++g) {
    ContenderTiming c;
    c.name = g == 0 ? "Sim" : "M" + std::to_string(g);
    c.simulation = g == 0;
    for (int r = 0; r < reps; ++r) c.seconds.push_back(10.0 + g + 0.1 * n(rng));
    c.mean = mean(c.seconds);
    c.stddev = std::sqrt(variance(c.seconds));
    t.contenders.push_back(c);
  }
  for (auto& c : t.contenders) c.suf = speedup_factor(t.contenders[0].seconds, c.seconds);
  return t;
}

}  // namespace

TEST(Rmse, Examples) {
  Matrix y(1, 2), yhat(1, 2);
  y << 1, 1;
  yhat << 1.001, 0.999;
  EXPECT_NEAR(rmse(y, yhat), 1e-3, 1e-15);
  EXPECT_EQ(rmse(y, y), 0.0);
  EXPECT_THROW((void)rmse(y, Matrix(2, 1)), std::invalid_argument);
  EXPECT_THROW((void)rmse(Matrix(0, 0), Matrix(0, 0)), std::invalid_argument);
}

TEST(Rmse, Verdicts) {
  EXPECT_FALSE(meets_threshold(1.1e-3));
  EXPECT_TRUE(meets_threshold(7.57e-5));
  EXPECT_TRUE(meets_threshold(1e-3));
}

TEST(Rmse, PerBusAggregationIdentity) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(1.0, 0.01);
  Matrix y(300, 17), yhat(300, 17);
  for (Index i = 0; i < y.size(); ++i) {
    y.data()[i] = n(rng);
    yhat.data()[i] = n(rng);
  }
  double mse_sum = 0.0;
  for (Index b = 0; b < y.cols(); ++b) mse_sum += (y.col(b) - yhat.col(b)).squaredNorm() / 300.0;
  EXPECT_NEAR(rmse(y, yhat), std::sqrt(mse_sum / 17.0), 1e-12);
}

TEST(SpeedupFactor, TableValues) {
  const std::vector<double> sim = {1354.45}, knn = {362.26}, slow = {3275.52};
  EXPECT_NEAR(speedup_factor(sim, knn), 3.74, 0.005);
  EXPECT_NEAR(speedup_factor(std::vector<double>{6388.01}, std::vector<double>{363.11}), 17.59, 0.005);
  EXPECT_NEAR(speedup_factor(sim, slow), 0.41, 0.005);
  EXPECT_EQ(speedup_factor(sim, sim), 1.0);
}

TEST(SpeedupFactor, ScaleInvariantAndValidated) {
  const std::vector<double> a = {3.0, 4.0, 5.5}, b = {1.0, 1.2, 0.9};
  std::vector<double> a7, b7;
  for (double v : a) a7.push_back(7.0 * v);
  for (double v : b) b7.push_back(7.0 * v);
  EXPECT_NEAR(speedup_factor(a, b), speedup_factor(a7, b7), 1e-14);
  EXPECT_THROW((void)speedup_factor(std::vector<double>{}, b), std::invalid_argument);
  EXPECT_THROW((void)speedup_factor(a, std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST(StatsBattery, SevenGroupsGiveTwentyOnePairs) {
  const auto t = synthetic_timing(7, 10, 1);
  const auto s = run_stats_battery(t, 0.05);
  EXPECT_EQ(s.comparisons, 21);
  EXPECT_EQ(s.pairs.size(), 21u);
  EXPECT_NEAR(s.alpha_adjusted, 0.05 / 21.0, 1e-15);
  EXPECT_EQ(s.shapiro.size(), 7u);
  EXPECT_EQ(s.anova.df1, 6.0);
  EXPECT_EQ(s.anova.df2, 63.0);
  for (const auto& p : s.pairs) {
    EXPECT_NEAR(p.p_adjusted, std::min(1.0, 21.0 * p.test.p_value), 1e-15);
    EXPECT_EQ(p.significant, p.p_adjusted < 0.05);
  }
}

TEST(StatsBattery, IdenticalGroups) {
  auto t = synthetic_timing(3, 5, 2);
  t.contenders[1].seconds = t.contenders[0].seconds;
  t.contenders[2].seconds = t.contenders[0].seconds;
  const auto s = run_stats_battery(t);
  EXPECT_EQ(s.anova.statistic, 0.0);
  for (const auto& p : s.pairs) {
    EXPECT_EQ(p.test.statistic, 0.0);
    EXPECT_EQ(p.test.p_value, 1.0);
    EXPECT_FALSE(p.significant);
  }
}

TEST(StatsBattery, DegenerateGroupsDoNotCrash) {
  auto t = synthetic_timing(3, 2, 3);
  t.contenders[1].seconds = {2.0, 2.0};
  t.contenders[2].seconds = {3.0, 3.0};
  const auto s = run_stats_battery(t);
  EXPECT_FALSE(s.shapiro[0].error.empty());  // n = 2 is below the Shapiro-Wilk range
  const auto& p = s.pairs[2];
  EXPECT_TRUE(std::isinf(p.test.statistic));
  EXPECT_EQ(p.test.p_value, 0.0);
}

TEST(Accuracy, EmptyModelListGivesEmptyReport) {
  const auto ds = cigre_shaped(5, 1);
  const auto r = run_accuracy_experiment(build_fixture(FixtureKind::CigreLvLike), ds, {});
  EXPECT_TRUE(r.models.empty());
}

TEST(Accuracy, ConstantModelBaseline) {
  const auto ds = cigre_shaped(10, 2);
  const Matrix ones = Matrix::Ones(ds.targets.rows(), ds.targets.cols());
  const double r = rmse(ds.targets, ones);
  EXPECT_NEAR(r, std::sqrt((ds.targets.array() - 1.0).square().mean()), 1e-15);
  EXPECT_FALSE(meets_threshold(r));
}

TEST(Accuracy, TwelveFoldsPerModelAndAggregates) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto ds = cigre_shaped(30, 3);
  const auto r = run_accuracy_experiment(g, ds, small_specs());
  ASSERT_EQ(r.models.size(), 2u);
  const auto& lr = r.models[0];
  ASSERT_EQ(lr.fold_rmse.size(), 12u);
  EXPECT_TRUE(std::isnan(lr.tuning_score));
  double sum = 0.0;
  for (double v : lr.fold_rmse) sum += v;
  EXPECT_NEAR(lr.yearly_rmse, sum / 12.0, 1e-15);
  EXPECT_EQ(lr.pass, lr.yearly_rmse <= 1e-3);
  EXPECT_TRUE(lr.pass);
  // Pooled out-of-fold error: per-bus and per-subgrid values recombine.
  double mse = 0.0;
  for (double b : lr.bus_rmse) mse += b * b;
  double weighted = 0.0;
  std::map<std::string, int> count;
  for (const auto& bus : g.buses) ++count[bus.subgrid.value_or("unlabelled")];
  for (const auto& [label, v] : lr.subgrid_rmse) weighted += v * v * count.at(label);
  EXPECT_NEAR(weighted, mse, 1e-18);
  EXPECT_EQ(lr.subgrid_rmse.size(), 4u);
  EXPECT_LE(lr.bus_rmse[0], 1e-12);  // the slack bus is constant
  const auto& knn = r.models[1];
  EXPECT_FALSE(std::isnan(knn.tuning_score));
  EXPECT_TRUE(std::get<KnnParams>(knn.params).k == 1 || std::get<KnnParams>(knn.params).k == 3 ||
              std::get<KnnParams>(knn.params).k == 9);
}

TEST(Accuracy, FitFailuresAreRecordedPerFold) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto ds = cigre_shaped(3, 4);  // 33 training rows per fold, fewer than k
  ModelSpec knn{"big k", Family::Knn, KnnParams{34, Weighting::Uniform}, Tuner::None, std::nullopt, 1};
  const auto r = run_accuracy_experiment(g, ds, {knn});
  const auto& m = r.models[0];
  for (int k = 0; k < 12; ++k) {
    EXPECT_TRUE(std::isnan(m.fold_rmse[k]));
    EXPECT_FALSE(m.fold_error[k].empty());
  }
  EXPECT_FALSE(m.pass);
}

TEST(Accuracy, Deterministic) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto ds = cigre_shaped(12, 5);
  const auto a = emit_report(run_accuracy_experiment(g, ds, small_specs()), ReportFormat::Json);
  const auto b = emit_report(run_accuracy_experiment(g, ds, small_specs()), ReportFormat::Json);
  EXPECT_EQ(a, b);
}

TEST(Timing, SweepStructure) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  auto ds = cigre_shaped(4, 6);
  ds.inputs *= 0.5;  // keep the power flow comfortably feasible
  const auto lr = fit_linear_ensemble(ds.inputs, ds.targets, {});
  TimingOptions opts;
  opts.n_reps = 3;
  const auto t = run_timing_experiment(g, ds, {{"RE LR", lr.get(), 1e-4}}, opts);
  ASSERT_EQ(t.contenders.size(), 2u);
  EXPECT_EQ(t.contenders[0].name, "Sim");
  EXPECT_EQ(t.contenders[0].suf, 1.0);
  EXPECT_EQ(t.steps, 48u);
  for (const auto& c : t.contenders) {
    EXPECT_EQ(c.seconds.size(), 3u);
    for (double s : c.seconds) EXPECT_GT(s, 0.0);
  }
  EXPECT_NEAR(t.contenders[1].suf, speedup_factor(t.contenders[0].seconds, t.contenders[1].seconds), 1e-15);
  ASSERT_TRUE(t.stats.has_value());
  EXPECT_EQ(t.stats->pairs.size(), 1u);
  opts.n_reps = 1;
  EXPECT_THROW((void)run_timing_experiment(g, ds, {}, opts), std::invalid_argument);
}

TEST(Reports, AccuracyFormats) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto r = run_accuracy_experiment(g, cigre_shaped(10, 7), small_specs());
  const std::string csv = emit_report(r, ReportFormat::Csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,family,month,rmse,error");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 12 * 2);
  const auto j = json::parse(emit_report(r, ReportFormat::Json));
  EXPECT_EQ(j.at("models").size(), 2u);
  EXPECT_EQ(j.at("models")[0].at("fold_rmse").size(), 12u);
  const auto back = accuracy_report_from_json(j);
  EXPECT_EQ(emit_report(back, ReportFormat::Json), emit_report(r, ReportFormat::Json));
  const std::string md = emit_report(r, ReportFormat::Markdown);
  EXPECT_NE(md.find("residential"), std::string::npos);
}

TEST(Reports, TimingFormats) {
  auto t = synthetic_timing(3, 4, 8);
  t.stats = run_stats_battery(t);
  const auto j = json::parse(emit_report(t, ReportFormat::Json));
  for (const char* key : {"contenders", "tests", "n_reps"}) EXPECT_TRUE(j.contains(key)) << key;
  const auto& c = j.at("contenders")[1];
  for (const char* key : {"seconds", "mean", "stddev", "suf"}) EXPECT_TRUE(c.contains(key)) << key;
  EXPECT_EQ(j.at("tests").at("pairwise_welch").size(), 3u);
  const auto back = timing_report_from_json(j);
  EXPECT_EQ(emit_report(back, ReportFormat::Json), emit_report(t, ReportFormat::Json));
  const std::string csv = emit_report(t, ReportFormat::Csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,rep,seconds");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 4);
  const std::string md = emit_summary(nullptr, &t);
  const auto header = md.substr(0, md.find('\n'));
  const auto pos = [&](const char* s) { return header.find(s); };
  ASSERT_NE(pos("RMSE"), std::string::npos);
  EXPECT_LT(pos("Model"), pos("RMSE"));
  EXPECT_LT(pos("RMSE"), pos("Calc. [s]"));
  EXPECT_LT(pos("Calc. [s]"), pos("StD."));
  EXPECT_LT(pos("StD."), pos("SUF"));
}

TEST(Reports, NonFiniteValuesSurviveJson) {
  AccuracyReport r;
  ModelAccuracy m;
  m.name = "broken";
  m.fold_rmse.assign(12, std::numeric_limits<double>::quiet_NaN());
  m.fold_error.assign(12, "boom");
  m.yearly_rmse = std::numeric_limits<double>::quiet_NaN();
  m.tuning_score = std::numeric_limits<double>::infinity();
  r.models.push_back(m);
  const auto back = accuracy_report_from_json(json::parse(emit_report(r, ReportFormat::Json)));
  EXPECT_TRUE(std::isnan(back.models[0].yearly_rmse));
  EXPECT_TRUE(std::isinf(back.models[0].tuning_score));
  EXPECT_EQ(back.models[0].fold_error[3], "boom");
  EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
  EXPECT_THROW((void)parse_report_format("xml"), std::invalid_argument);
}
