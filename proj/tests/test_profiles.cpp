#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gridsur/profiles.hpp"

using namespace gridsur;

namespace {

double month_mean(const TimeSeries& s, std::initializer_list<int> months) {
  double sum = 0.0;
  int n = 0;
  for (int t = 0; t < static_cast<int>(s.size()); ++t) {
    const int m = month_of_step(t);
    for (int want : months)
      if (m == want) {
        sum += s.values[t];
        ++n;
      }
  }
  return sum / n;
}

}  // namespace

TEST(Calendar, YearLayout) {
  EXPECT_EQ(kStepsPerYear, 35040);
  EXPECT_EQ(month_of_step(0), 1);
  EXPECT_EQ(month_of_step(31 * 96 - 1), 1);
  EXPECT_EQ(month_of_step(31 * 96), 2);
  EXPECT_EQ(month_of_step(kStepsPerYear - 1), 12);
  EXPECT_EQ(std::accumulate(kDaysInMonth.begin(), kDaysInMonth.end(), 0), 365);
  EXPECT_EQ(weekday_of_day(0), 1);
  EXPECT_EQ(weekday_of_day(6), 0);
}

TEST(Profiles, ShapeAndSign) {
  for (auto kind : {ProfileKind::Household, ProfileKind::Commercial, ProfileKind::Industrial,
                    ProfileKind::Pv}) {
    const auto s = synth_profile(kind, 11, 0.5);
    ASSERT_EQ(s.size(), static_cast<std::size_t>(kStepsPerYear));
    EXPECT_EQ(s.step_minutes, 15);
    for (double v : s.values) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
    }
  }
}

TEST(Profiles, PvIsZeroAtThreeInTheMorning) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto pv = synth_profile(ProfileKind::Pv, seed, 1.0);
    for (int day = 0; day < kDaysPerYear; ++day) ASSERT_EQ(pv.values[day * 96 + 12], 0.0);
  }
}

TEST(Profiles, Deterministic) {
  EXPECT_EQ(synth_profile(ProfileKind::Household, 7, 1.0),
            synth_profile(ProfileKind::Household, 7, 1.0));
  EXPECT_NE(synth_profile(ProfileKind::Household, 7, 1.0),
            synth_profile(ProfileKind::Household, 8, 1.0));
}

TEST(Profiles, Seasonality) {
  const auto hh = synth_profile(ProfileKind::Household, 5, 1.0);
  EXPECT_GT(month_mean(hh, {12, 1, 2}), month_mean(hh, {6, 7, 8}));
  const auto pv = synth_profile(ProfileKind::Pv, 5, 1.0);
  EXPECT_LT(month_mean(pv, {12, 1, 2}), month_mean(pv, {6, 7, 8}));
  const auto com = synth_profile(ProfileKind::Commercial, 5, 1.0);
  EXPECT_GT(month_mean(com, {6, 7, 8}), month_mean(com, {12, 1, 2}));
}

TEST(Profiles, ScaleIsLinear) {
  const auto a = synth_profile(ProfileKind::Commercial, 3, 1.0);
  const auto b = synth_profile(ProfileKind::Commercial, 3, 2.0);
  for (std::size_t t = 0; t < a.size(); t += 97) EXPECT_NEAR(b.values[t], 2.0 * a.values[t], 1e-12);
}

TEST(Profiles, KindFromId) {
  EXPECT_EQ(profile_kind_of("household_R1"), ProfileKind::Household);
  EXPECT_EQ(profile_kind_of("pv_3"), ProfileKind::Pv);
  EXPECT_EQ(profile_kind_of("industrial_I1"), ProfileKind::Industrial);
  EXPECT_THROW((void)profile_kind_of("wind_1"), std::invalid_argument);
}

TEST(ReactivePower, ConstantPowerFactor) {
  TimeSeries p;
  p.values = {0.9, 0.0, 1.0};
  const auto q = q_from_constant_pf(p, 0.9);
  EXPECT_NEAR(q.values[0], 0.43589, 1e-5);
  EXPECT_NEAR(q.values[0], 0.9 * std::tan(std::acos(0.9)), 1e-15);
  EXPECT_EQ(q.values[1], 0.0);
  for (double v : q_from_constant_pf(p, 1.0).values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW((void)q_from_constant_pf(p, 0.0), std::invalid_argument);
  EXPECT_THROW((void)q_from_constant_pf(p, 1.01), std::invalid_argument);
}

TEST(ReactivePower, IndependentSeriesVariesPhaseAngle) {
  const auto p = synth_profile(ProfileKind::Household, 1, 1.0);
  const auto q = synth_reactive(p, ProfileKind::Household, 2);
  double lo = 1.0, hi = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p.values[t] < 1e-3) continue;
    const double cos_phi = p.values[t] / std::hypot(p.values[t], q.values[t]);
    lo = std::min(lo, cos_phi);
    hi = std::max(hi, cos_phi);
    ASSERT_GE(q.values[t], 0.0);
  }
  EXPECT_GT(hi - lo, 0.02);
  EXPECT_GE(lo, 0.9 - 1e-9);
  const auto pv = synth_profile(ProfileKind::Pv, 1, 1.0);
  const auto qpv = synth_reactive(pv, ProfileKind::Pv, 2);
  for (std::size_t t = 0; t < pv.size(); ++t) ASSERT_LE(qpv.values[t], 0.0);
}

TEST(Profiles, BuildProfilesCoversEveryAttachment) {
  const Grid g = build_fixture(FixtureKind::RuralLvLike);
  ProfileConfig cfg;
  cfg.reactive = ReactiveMode::Independent;
  const auto set = build_profiles(g, cfg);
  for (const auto& a : g.attachments) EXPECT_TRUE(set.contains(a.profile_id));
  EXPECT_EQ(set, build_profiles(g, cfg));
}

TEST(Profiles, CsvRoundTrip) {
  const Grid g = build_fixture(FixtureKind::CigreLvLike);
  const auto set = build_profiles(g, ProfileConfig{});
  EXPECT_EQ(profiles_from_csv(profiles_to_csv(set)), set);
  EXPECT_THROW((void)profiles_from_csv("x,a.p,a.q\n0,1,2\n"), std::runtime_error);
  EXPECT_THROW((void)profiles_from_csv("t,a.p,b.q\n0,1,2\n"), std::runtime_error);
}
