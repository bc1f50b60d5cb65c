#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gridsur/stats.hpp"

using namespace gridsur;

namespace {

// Simpson quadrature of the Student t density, used as an independent
// oracle for the two-sided p-value.
double t_two_sided_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  const auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const double a = 0.0, b = std::abs(t);
  const int n = 20000;
  const double h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * (s * h / 3.0);
}

}  // namespace

TEST(IncompleteBeta, Boundaries) {
  EXPECT_EQ(reg_inc_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(reg_inc_beta(2.0, 3.0, 1.0), 1.0);
  EXPECT_NEAR(reg_inc_beta(1.0, 1.0, 0.5), 0.5, 1e-15);
  EXPECT_THROW((void)reg_inc_beta(0.0, 1.0, 0.5), std::domain_error);
  EXPECT_THROW((void)reg_inc_beta(1.0, 1.0, 1.5), std::domain_error);
}

TEST(IncompleteBeta, ClosedFormPolynomial) {
  // I_x(2,3) = 6x^2 - 8x^3 + 3x^4.
  EXPECT_NEAR(reg_inc_beta(2.0, 3.0, 0.25), 0.26171875, 1e-12);
  for (double x = 0.05; x < 1.0; x += 0.05)
    EXPECT_NEAR(reg_inc_beta(2.0, 3.0, x), 6 * x * x - 8 * x * x * x + 3 * x * x * x * x, 1e-12);
}

TEST(IncompleteBeta, ScipyReferenceValues) {
  EXPECT_NEAR(reg_inc_beta(2.5, 3.5, 0.4), 0.4869041915261176, 1e-10);
  EXPECT_NEAR(reg_inc_beta(10, 20, 0.3), 0.3640040810719437, 1e-10);
  EXPECT_NEAR(reg_inc_beta(0.5, 0.5, 0.1), 0.20483276469913345, 1e-10);
}

TEST(Distributions, ScipyReferenceValues) {
  EXPECT_NEAR(t_cdf(1.5, 3.7), 0.8932009153989934, 1e-9);
  EXPECT_NEAR(t_cdf(-2.0, 10), 0.036694017385370196, 1e-9);
  EXPECT_NEAR(f_cdf(2.5, 3, 12.5), 0.8928453984891805, 1e-9);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-8);
  EXPECT_NEAR(normal_cdf(normal_quantile(0.3)), 0.3, 1e-14);
}

TEST(Distributions, CdfsAreMonotone) {
  double pt = 0.0, pf = 0.0, pn = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.01) {
    const double t = t_cdf(x, 4.3), n = normal_cdf(x);
    ASSERT_GE(t, pt);
    ASSERT_GE(n, pn);
    ASSERT_GE(t, 0.0);
    ASSERT_LE(t, 1.0);
    pt = t;
    pn = n;
    if (x >= 0) {
      const double f = f_cdf(x, 2, 6);
      ASSERT_GE(f, pf);
      ASSERT_LE(f, 1.0);
      pf = f;
    }
  }
}

TEST(Welch, HandExample) {
  const Sample a = {1, 2, 3}, b = {2, 3, 4};
  const auto r = welch_t(a, b);
  EXPECT_EQ(r.kind, TestKind::WelchT);
  EXPECT_NEAR(r.statistic, -1.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.statistic, -1.2247, 1e-4);
  EXPECT_NEAR(r.df1, 4.0, 1e-4);
  EXPECT_NEAR(r.p_value, 0.2879, 1e-3);
  EXPECT_NEAR(r.p_value, t_two_sided_quadrature(r.statistic, r.df1), 1e-9);
}

TEST(Welch, EqualSamples) {
  const Sample a = {1.5, 2.5, 9.0};
  const auto r = welch_t(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Welch, ZeroVarianceCases) {
  const Sample a = {2, 2, 2}, b = {2, 2}, c = {3, 3, 3};
  const auto same = welch_t(a, b);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  const auto diff = welch_t(a, c);
  EXPECT_TRUE(std::isinf(diff.statistic));
  EXPECT_LT(diff.statistic, 0.0);
  EXPECT_EQ(diff.p_value, 0.0);
}

TEST(Welch, AntisymmetricAndScipyReference) {
  const Sample a = {2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8}, b = {4.0, 5.1, 6.3, 5.5, 4.9, 7.2};
  const auto ab = welch_t(a, b), ba = welch_t(b, a);
  EXPECT_EQ(ab.statistic, -ba.statistic);
  EXPECT_EQ(ab.p_value, ba.p_value);
  EXPECT_NEAR(ab.statistic, -3.189564748614869, 1e-10);
  EXPECT_NEAR(ab.df1, 10.994909012429298, 1e-9);
  EXPECT_NEAR(ab.p_value, 0.008617934391610163, 1e-9);
  EXPECT_THROW((void)welch_t(Sample{1.0}, b), std::invalid_argument);
}

TEST(Anova, HandExample) {
  const auto r = anova_oneway({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  EXPECT_NEAR(r.statistic, 3.0, 1e-12);
  EXPECT_EQ(r.df1, 2.0);
  EXPECT_EQ(r.df2, 6.0);
  EXPECT_NEAR(r.p_value, 0.125, 2e-3);
  // F(2, d) survival has the closed form (1 + 2F/d)^(-d/2).
  EXPECT_NEAR(r.p_value, std::pow(1.0 + 2.0 * 3.0 / 6.0, -3.0), 1e-10);
}

TEST(Anova, IdenticalMeansAndDegenerateCases) {
  const auto r = anova_oneway({{1, 2, 3}, {3, 2, 1}});
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  const auto inf = anova_oneway({{1, 1}, {2, 2}});
  EXPECT_TRUE(std::isinf(inf.statistic));
  EXPECT_EQ(inf.p_value, 0.0);
  EXPECT_THROW((void)anova_oneway({{1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW((void)anova_oneway({{1, 2, 3}, {4}}), std::invalid_argument);
}

TEST(Anova, ScipyReferenceAndRelabeling) {
  const std::vector<Sample> g = {{2.1, 3.4, 1.9, 5.6, 4.4}, {4.0, 5.1, 6.3, 5.5, 4.9, 7.2}, {1.0, 1.5, 0.7, 2.2}};
  const auto r = anova_oneway(g);
  EXPECT_NEAR(r.statistic, 14.453570192640427, 1e-9);
  EXPECT_NEAR(r.p_value, 0.0006372249166040351, 1e-10);
  const auto s = anova_oneway({g[2], g[0], g[1]});
  EXPECT_NEAR(s.statistic, r.statistic, 1e-12);
  EXPECT_NEAR(s.p_value, r.p_value, 1e-15);
}

TEST(Anova, TwoGroupsEqualsPooledTSquared) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  Sample a(12), b(12);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng) + 0.7;
  const double sp2 = (variance(a) + variance(b)) / 2.0;
  const double t = (mean(a) - mean(b)) / std::sqrt(sp2 * (2.0 / 12.0));
  EXPECT_NEAR(anova_oneway({a, b}).statistic, t * t, 1e-8);
  // With equal sizes and variances Welch reduces to the pooled statistic.
  EXPECT_NEAR(welch_t(a, b).statistic, t, 1e-12);
}

TEST(Levene, Cases) {
  EXPECT_EQ(levene({{1, 2, 4}, {1, 2, 4}}).statistic, 0.0);
  EXPECT_NEAR(levene({{1, 2, 4}, {11, 12, 14}, {-4, -3, -1}}).statistic, 0.0, 1e-10);
  const auto r = levene({{0, 2}, {-5, 5}});
  EXPECT_EQ(r.kind, TestKind::Levene);
  EXPECT_TRUE(std::isinf(r.statistic));
  EXPECT_EQ(r.p_value, 0.0);
}

TEST(Levene, ScipyReference) {
  const std::vector<Sample> g = {{2.1, 3.4, 1.9, 5.6, 4.4}, {4.0, 5.1, 6.3, 5.5, 4.9, 7.2}, {1.0, 1.5, 0.7, 2.2}};
  const auto r = levene(g);
  EXPECT_NEAR(r.statistic, 1.449360129927389, 1e-9);
  EXPECT_NEAR(r.p_value, 0.27301950888135007, 1e-9);
  EXPECT_NEAR(levene({g[1], g[2], g[0]}).statistic, r.statistic, 1e-12);
}

TEST(ShapiroWilk, ThreeEquallySpacedPoints) {
  const auto r = shapiro_wilk(Sample{1, 2, 3});
  EXPECT_NEAR(r.statistic, 1.0, 1e-6);
  EXPECT_NEAR(r.p_value, 1.0, 1e-6);
  EXPECT_TRUE(std::isnan(r.df1));
}

TEST(ShapiroWilk, AffineInvariance) {
  const Sample s = {2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.0, 5.1, 6.3};
  Sample t;
  for (double v : s) t.push_back(-3.7 * v + 120.0);
  EXPECT_NEAR(shapiro_wilk(s).statistic, shapiro_wilk(t).statistic, 1e-10);
}

TEST(ShapiroWilk, ReferenceValues) {
  const auto a = shapiro_wilk(Sample{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.0, 5.1, 6.3});
  EXPECT_NEAR(a.statistic, 0.9650378700836926, 1e-6);
  EXPECT_NEAR(a.p_value, 0.84141808808273, 1e-4);
  const auto b = shapiro_wilk(Sample{0.2, 0.9, 1.1, 1.7, 2.5, 3.9, 6.4, 10.2, 17.5, 30.1, 45.0});
  EXPECT_NEAR(b.statistic, 0.7568205252068873, 1e-6);
  EXPECT_NEAR(b.p_value, 0.0025516853311686686, 1e-4);
  const auto c = shapiro_wilk(Sample{1, 2, 4});
  EXPECT_NEAR(c.statistic, 0.9642857142857142, 1e-6);
  EXPECT_NEAR(c.p_value, 0.6368868450289689, 1e-4);
}

TEST(ShapiroWilk, BimodalSampleRejected) {
  const auto r = shapiro_wilk(Sample{0, 0, 0, 0, 0, 10, 10, 10, 10, 10});
  EXPECT_LT(r.statistic, 0.9);
  EXPECT_NEAR(r.statistic, 0.6552710244620128, 1e-6);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(ShapiroWilk, DomainErrors) {
  EXPECT_THROW((void)shapiro_wilk(Sample{1, 2}), std::invalid_argument);
  EXPECT_THROW((void)shapiro_wilk(Sample(51, 1.0)), std::invalid_argument);
  EXPECT_THROW((void)shapiro_wilk(Sample{3, 3, 3, 3}), std::invalid_argument);
}

TEST(Bonferroni, Arithmetic) {
  const std::vector<double> p = {0.001, 0.1, 0.5};
  const auto adj = bonferroni_adjust(p, 21);
  EXPECT_NEAR(adj[0], 0.021, 1e-15);
  EXPECT_EQ(adj[1], 1.0);
  EXPECT_EQ(adj[2], 1.0);
  EXPECT_EQ(bonferroni_adjust(p, 1), p);
  EXPECT_THROW((void)bonferroni_adjust(p, 0), std::invalid_argument);
}

TEST(Stats, PValuesInUnitInterval) {
  std::mt19937_64 rng(9);
  std::lognormal_distribution<double> d(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Sample> g(4, Sample(8));
    for (auto& s : g)
      for (auto& v : s) v = d(rng);
    for (const auto& r : {anova_oneway(g), levene(g), welch_t(g[0], g[1]), shapiro_wilk(g[2])}) {
      ASSERT_GE(r.p_value, 0.0);
      ASSERT_LE(r.p_value, 1.0);
    }
  }
}
