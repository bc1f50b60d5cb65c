#include "gridsur/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace gridsur {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300, eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

double poly(std::initializer_list<double> c, double x) {
  double r = 0.0;
  for (auto it = std::rbegin(c); it != std::rend(c); ++it) r = r * x + *it;
  return r;
}

}  // namespace

std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::Levene: return "levene";
    case TestKind::ShapiroWilk: return "shapiro_wilk";
    case TestKind::AnovaF: return "anova";
    case TestKind::WelchT: return "welch_t";
  }
  return "?";
}

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_inc_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reg_inc_beta: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return clamp01(front * beta_cf(a, b, x) / a);
  return clamp01(1.0 - front * beta_cf(b, a, 1.0 - x) / b);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::domain_error("normal_quantile: p must be in [0, 1]");
  }
  // Bracket, bisect, then polish with Newton steps on the exact CDF.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf <= 0.0) break;
    z -= (normal_cdf(z) - p) / pdf;
  }
  return z;
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::domain_error("t_cdf: df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

double f_cdf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::domain_error("f_cdf: degrees of freedom must be > 0");
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  return reg_inc_beta(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2));
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t needs >= 2 values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = variance(a) / na, vb = variance(b) / nb;
  const double diff = mean(a) - mean(b);
  TestResult r{TestKind::WelchT, 0.0, 0.0, kNaN, 1.0};
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.df1 = na + nb - 2.0;
    if (diff == 0.0) return r;
    r.statistic = diff > 0 ? kInf : -kInf;
    r.p_value = 0.0;
    return r;
  }
  r.statistic = diff / std::sqrt(se2);
  r.df1 = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const double t2 = r.statistic * r.statistic;
  r.p_value = clamp01(reg_inc_beta(0.5 * r.df1, 0.5, r.df1 / (r.df1 + t2)));
  return r;
}

TestResult anova_oneway(const std::vector<Sample>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("ANOVA needs at least 2 groups");
  double total = 0.0, n = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw std::invalid_argument("ANOVA needs >= 2 values per group");
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += static_cast<double>(g.size());
  }
  const double grand = total / n;
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  const double k = static_cast<double>(groups.size());
  TestResult r{TestKind::AnovaF, 0.0, k - 1.0, n - k, 1.0};
  if (ssw == 0.0) {
    if (ssb > 0.0) {
      r.statistic = kInf;
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = (ssb / r.df1) / (ssw / r.df2);
  r.p_value = r.statistic == 0.0
                  ? 1.0
                  : clamp01(reg_inc_beta(0.5 * r.df2, 0.5 * r.df1, r.df2 / (r.df2 + r.df1 * r.statistic)));
  return r;
}

TestResult levene(const std::vector<Sample>& groups) {
  std::vector<Sample> dev;
  dev.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("Levene test needs nonempty groups");
    const double m = mean(g);
    Sample d;
    for (double v : g) d.push_back(std::abs(v - m));
    dev.push_back(std::move(d));
  }
  TestResult r = anova_oneway(dev);
  r.kind = TestKind::Levene;
  return r;
}

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 50) throw std::invalid_argument("Shapiro-Wilk needs 3 <= n <= 50");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() <= 0.0) throw std::invalid_argument("Shapiro-Wilk: sample has zero variance");

  const double an = static_cast<double>(n);
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly({0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056}, rsn) - m[0] / ssumm2;
    std::size_t first = 1;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly({0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633}, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  // W is the squared correlation between the ordered sample and the
  // antisymmetric coefficient vector.
  const double xm = mean(x);
  double num = 0.0, ss = 0.0, aa = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    num += a[i] * (x[n - 1 - i] - x[i]);
    aa += 2.0 * a[i] * a[i];
  }
  for (double v : x) ss += (v - xm) * (v - xm);
  const double w = std::min(1.0, num * num / (aa * ss));

  TestResult r{TestKind::ShapiroWilk, w, kNaN, kNaN, 1.0};
  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi, stqr = std::numbers::pi / 3.0;
    r.p_value = clamp01(pi6 * (std::asin(std::sqrt(w)) - stqr));
    return r;
  }
  const double w1 = 1.0 - w;
  if (w1 <= 0.0) return r;
  double y = std::log(w1);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly({-2.273, 0.459}, an);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    mu = poly({0.544, -0.39978, 0.025054, -6.714e-4}, an);
    sigma = std::exp(poly({1.3822, -0.77857, 0.062767, -0.0020322}, an));
  } else {
    const double ln = std::log(an);
    mu = poly({-1.5861, -0.31082, -0.083751, 0.0038915}, ln);
    sigma = std::exp(poly({-0.4803, -0.082676, 0.0030302}, ln));
  }
  r.p_value = clamp01(0.5 * std::erfc((y - mu) / sigma / std::numbers::sqrt2));
  return r;
}

std::vector<double> bonferroni_adjust(std::span<const double> p_values, int m) {
  if (m < 1) throw std::invalid_argument("Bonferroni comparison count must be >= 1");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-value outside [0, 1]");
    out.push_back(std::min(1.0, p * m));
  }
  return out;
}

}  // namespace gridsur
