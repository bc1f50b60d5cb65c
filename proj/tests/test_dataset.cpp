#include <gtest/gtest.h>

#include <filesystem>

#include "gridsur/csv.hpp"
#include "gridsur/dataset.hpp"
#include "gridsur/util.hpp"

using namespace gridsur;

namespace {

ProfileSet zero_profiles(const Grid& g) {
  ProfileSet set;
  for (const auto& a : g.attachments) {
    ProfilePair pair;
    pair.p.values.assign(kStepsPerYear, 0.0);
    pair.q.values.assign(kStepsPerYear, 0.0);
    set[a.profile_id] = pair;
  }
  return set;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gridsur_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Dataset, ZeroProfilesGiveFlatVoltages) {
  for (auto kind : {FixtureKind::CigreLvLike, FixtureKind::RuralLvLike}) {
    Grid g = build_fixture(kind);
    for (auto& line : g.lines) line.c_nf_per_km = 0.0;
    const auto ds = generate_dataset(g, zero_profiles(g));
    EXPECT_EQ(ds.rows(), kStepsPerYear);
    EXPECT_LE((ds.targets.array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_EQ(ds.meta.out_of_envelope, 0u);
  }
}

TEST(Dataset, LineChargingLiftsNoLoadVoltages) {
  const Grid g = build_fixture(FixtureKind::RuralLvLike);
  const auto ds = generate_dataset(g, zero_profiles(g));
  EXPECT_GE(ds.targets.minCoeff(), 1.0);
  EXPECT_LE(ds.targets.maxCoeff(), 1.0 + 1e-4);
}

TEST(Dataset, ColumnCounts) {
  const Grid c = build_fixture(FixtureKind::CigreLvLike);
  const auto a = generate_dataset(c, zero_profiles(c));
  EXPECT_EQ(a.inputs.cols(), 30);
  EXPECT_EQ(a.targets.cols(), 44);
  EXPECT_EQ(a.input_columns.front(), c.attachment_label(0) + ".p");
  EXPECT_EQ(a.input_columns[1], c.attachment_label(0) + ".q");
  EXPECT_EQ(a.target_columns.back(), "bus43.vm_pu");
  const Grid r = build_fixture(FixtureKind::RuralLvLike);
  const auto b = generate_dataset(r, zero_profiles(r));
  EXPECT_EQ(b.inputs.cols(), 270);
  EXPECT_EQ(b.targets.cols(), 128);
}

TEST(Dataset, MissingProfileIsRejected) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  auto set = zero_profiles(g);
  set.erase(g.attachments[3].profile_id);
  EXPECT_THROW((void)generate_dataset(g, set), std::invalid_argument);
}

TEST(Dataset, NonConvergenceNamesTheStep) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  auto set = zero_profiles(g);
  set.begin()->second.p.values[1234] = 1e4;
  try {
    (void)generate_dataset(g, set);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.step(), 1234);
  }
}

TEST(Dataset, MonthlyFolds) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto ds = generate_dataset(g, zero_profiles(g));
  const auto folds = monthly_folds(ds);
  ASSERT_EQ(folds.size(), 12u);
  EXPECT_EQ(folds[0].test.size(), 2976u);
  EXPECT_EQ(folds[1].test.size(), 2688u);
  std::vector<int> seen(kStepsPerYear, 0);
  for (const auto& f : folds) {
    EXPECT_EQ(f.train.size() + f.test.size(), static_cast<std::size_t>(kStepsPerYear));
    for (std::size_t i = 1; i < f.test.size(); ++i) EXPECT_EQ(f.test[i], f.test[i - 1] + 1);
    for (Index r : f.test) {
      ++seen[r];
      EXPECT_EQ(ds.month[r], f.month);
    }
    for (Index r : f.train) ASSERT_NE(ds.month[r], f.month);
  }
  for (int s : seen) ASSERT_EQ(s, 1);
}

// Full synthetic year on both fixtures: sanity envelope and CSV round trip.
TEST(Dataset, SyntheticYearCigre) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  DatasetOptions opts;
  const auto ds = generate_dataset(g, build_profiles(g, ProfileConfig{}), opts);
  EXPECT_GE(ds.targets.minCoeff(), 0.85);
  EXPECT_LE(ds.targets.maxCoeff(), 1.06);
  EXPECT_LT(ds.targets.minCoeff(), 0.999);
  EXPECT_EQ(ds.meta.out_of_envelope, 0u);
  EXPECT_EQ(ds.meta.grid_hash, grid_hash(g));

  // Each row reproduces an independent single-step solve.
  const auto y = build_ybus(g);
  for (Index t : {0, 5000, 20000, 35039}) {
    const Vector vm = simulate_step(g, y, ds.inputs.row(t).transpose(), SolverOptions{});
    EXPECT_EQ((vm - ds.targets.row(t).transpose()).cwiseAbs().maxCoeff(), 0.0);
  }

  const auto dir = temp_dir("dataset");
  const std::string path = (dir / "dataset.csv").string();
  write_dataset(ds, path);
  EXPECT_TRUE(std::filesystem::exists(dir / "dataset.meta.json"));
  EXPECT_EQ(sidecar_path(path), (dir / "dataset.meta.json").string());
  const auto back = read_dataset(path);
  EXPECT_EQ(back.input_columns, ds.input_columns);
  EXPECT_EQ(back.target_columns, ds.target_columns);
  EXPECT_EQ(back.inputs, ds.inputs);
  EXPECT_EQ(back.targets, ds.targets);
  EXPECT_EQ(back.month, ds.month);
  EXPECT_EQ(back.meta.grid_hash, ds.meta.grid_hash);
  EXPECT_EQ(dataset_to_csv(back), dataset_to_csv(ds));
  const auto table = parse_csv(read_file(path));
  EXPECT_EQ(table.header.front(), "t");
  EXPECT_EQ(table.header.size(), 1u + 30u + 44u);
}

TEST(Dataset, SyntheticYearRuralIndependentReactive) {
  const Grid g = build_fixture(FixtureKind::RuralLvLike);
  ProfileConfig cfg;
  cfg.reactive = ReactiveMode::Independent;
  DatasetOptions opts;
  opts.profile_config = cfg;
  const auto ds = generate_dataset(g, build_profiles(g, cfg), opts);
  EXPECT_GE(ds.targets.minCoeff(), 0.85);
  EXPECT_LE(ds.targets.maxCoeff(), 1.06);
  EXPECT_GT(ds.targets.maxCoeff(), 1.0);  // PV feed-in lifts voltages
  EXPECT_EQ(ds.meta.reactive_mode, "independent");
}

TEST(Dataset, JobsDoNotChangeRows) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto profiles = build_profiles(g, ProfileConfig{});
  DatasetOptions one, three;
  three.jobs = 3;
  const auto a = generate_dataset(g, profiles, one);
  const auto b = generate_dataset(g, profiles, three);
  EXPECT_EQ(a.targets, b.targets);
}

TEST(Csv, MalformedInputNamesLine) {
  try {
    (void)parse_csv("a,b\n1,2\n3,x\n");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  const auto t = parse_csv("a,b\n1,2\n3,4\n");
  EXPECT_EQ(t.rows, 2u);
  EXPECT_EQ(t.column(1), (std::vector<double>{2, 4}));
}
