#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace gridsur {

enum class TestKind { Levene, ShapiroWilk, AnovaF, WelchT };

[[nodiscard]] std::string_view to_string(TestKind k);

struct TestResult {
  TestKind kind = TestKind::WelchT;
  double statistic = 0.0;
  double df1 = 0.0;  // NaN when the test has no degrees of freedom
  double df2 = 0.0;  // NaN for one-parameter tests
  double p_value = 1.0;
};

using Sample = std::vector<double>;

/// Regularized incomplete beta I_x(a, b) by continued fraction.
[[nodiscard]] double reg_inc_beta(double a, double b, double x);

[[nodiscard]] double normal_cdf(double z);
[[nodiscard]] double normal_quantile(double p);
/// P(T <= t) for Student's t with df degrees of freedom.
[[nodiscard]] double t_cdf(double t, double df);
/// P(F <= f) for the F(d1, d2) distribution.
[[nodiscard]] double f_cdf(double f, double d1, double d2);

[[nodiscard]] double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator).
[[nodiscard]] double variance(std::span<const double> x);

/// Two-sided Welch t test with Welch-Satterthwaite degrees of freedom.
[[nodiscard]] TestResult welch_t(std::span<const double> a, std::span<const double> b);
[[nodiscard]] TestResult anova_oneway(const std::vector<Sample>& groups);
/// Mean-centred Levene test.
[[nodiscard]] TestResult levene(const std::vector<Sample>& groups);
/// Royston's approximation; 3 <= n <= 50.
[[nodiscard]] TestResult shapiro_wilk(std::span<const double> sample);

/// min(1, m * p) for each p.
[[nodiscard]] std::vector<double> bonferroni_adjust(std::span<const double> p_values, int m);

}  // namespace gridsur
