#include "gridsur/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gridsur/csv.hpp"
#include "gridsur/util.hpp"

namespace gridsur {

int month_of_step(int step) {
  if (step < 0 || step >= kStepsPerYear)
    throw std::out_of_range("step outside the reference year");
  int day = step / kStepsPerDay;
  for (int m = 0; m < 12; ++m) {
    if (day < kDaysInMonth[m]) return m + 1;
    day -= kDaysInMonth[m];
  }
  return 12;
}

int weekday_of_day(int day) { return (day + 1) % 7; }

ProfileKind profile_kind_of(std::string_view id) {
  const auto prefix = id.substr(0, id.find('_'));
  if (prefix == "household") return ProfileKind::Household;
  if (prefix == "commercial") return ProfileKind::Commercial;
  if (prefix == "industrial") return ProfileKind::Industrial;
  if (prefix == "pv") return ProfileKind::Pv;
  throw std::invalid_argument("profile id '" + std::string(id) +
                              "' has no known kind prefix");
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Household: return "household";
    case ProfileKind::Commercial: return "commercial";
    case ProfileKind::Industrial: return "industrial";
    case ProfileKind::Pv: return "pv";
  }
  return "?";
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLatitudeDeg = 52.5;
constexpr int kMidJanuary = 15;
constexpr int kMidJuly = 196;

double hour_of_step(int step) {
  return (step % kStepsPerDay + 0.5) * kStepMinutes / 60.0;
}

// Circular Gaussian bump on the 24 h clock.
double bump(double h, double centre, double width) {
  double d = std::fabs(h - centre);
  d = std::min(d, 24.0 - d);
  return std::exp(-0.5 * d * d / (width * width));
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// 1 between `open` and `close` with one-hour ramps.
double block(double h, double open, double close) {
  return smoothstep(h - open + 0.5) * (1.0 - smoothstep(h - close + 0.5));
}

double seasonal(int day, int peak_day, double amplitude) {
  return 1.0 + amplitude * std::cos(kTwoPi * (day - peak_day) / kDaysPerYear);
}

double household_envelope(int step) {
  const int day = step / kStepsPerDay;
  const double h = hour_of_step(step);
  const bool weekend = weekday_of_day(day) >= 5;
  const double morning = weekend ? 0.40 * bump(h, 9.0, 1.5)
                                 : 0.30 * bump(h, 7.25, 1.0);
  const double midday = (weekend ? 0.25 : 0.12) * bump(h, 12.5, 1.5);
  const double evening = 0.55 * bump(h, 19.0, 1.8);
  return (0.25 + morning + midday + evening) *
         seasonal(day, kMidJanuary, 0.3);
}

double commercial_envelope(int step) {
  const int day = step / kStepsPerDay;
  const double h = hour_of_step(step);
  const int wd = weekday_of_day(day);
  double shape = 0.3;
  if (wd < 5)
    shape += 0.7 * block(h, 8.0, 18.0);
  else if (wd == 5)
    shape += 0.35 * block(h, 9.0, 14.0);
  return shape * seasonal(day, kMidJuly, 0.15);
}

double industrial_envelope(int step) {
  const int day = step / kStepsPerDay;
  const double h = hour_of_step(step);
  const int wd = weekday_of_day(day);
  double shape = 0.45;
  if (wd < 5)
    shape += 0.55 * block(h, 6.0, 22.0);
  else if (wd == 5)
    shape += 0.3 * block(h, 6.0, 14.0);
  return shape * seasonal(day, kMidJuly, 0.08);
}

// Sine of the solar elevation angle at the step midpoint (solar time).
double solar_sin_elevation(int step) {
  const int day = step / kStepsPerDay;
  const double deg = std::numbers::pi / 180.0;
  const double decl =
      23.45 * deg * std::sin(kTwoPi * (284.0 + day + 1) / kDaysPerYear);
  const double omega = 15.0 * deg * (hour_of_step(step) - 12.0);
  const double lat = kLatitudeDeg * deg;
  return std::sin(lat) * std::sin(decl) +
         std::cos(lat) * std::cos(decl) * std::cos(omega);
}

double pv_envelope(int step) {
  const double s = solar_sin_elevation(step);
  return s > 0.0 ? std::pow(s, 1.15) : 0.0;
}

template <typename Envelope>
std::vector<double> normalized_envelope(Envelope env) {
  std::vector<double> out(kStepsPerYear);
  double peak = 0.0;
  for (int t = 0; t < kStepsPerYear; ++t) {
    out[t] = env(t);
    peak = std::max(peak, out[t]);
  }
  for (auto& v : out) v /= peak;
  return out;
}

// Mean-one lognormal multiplier driven by an AR(1) process in log space.
class LognormalNoise {
 public:
  LognormalNoise(std::mt19937_64& rng, double sigma, double rho)
      : rng_(rng), sigma_(sigma), rho_(rho) {}

  double next() {
    state_ = rho_ * state_ + std::sqrt(1.0 - rho_ * rho_) * normal_(rng_);
    return std::exp(sigma_ * state_ - 0.5 * sigma_ * sigma_);
  }

 private:
  std::mt19937_64& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double sigma_, rho_, state_ = 0.0;
};

TimeSeries load_profile(const std::vector<double>& envelope, std::uint64_t seed,
                        double scale, double step_sigma, double day_sigma) {
  std::mt19937_64 rng(seed);
  LognormalNoise step_noise(rng, step_sigma, 0.8);
  std::normal_distribution<double> normal(0.0, 1.0);
  TimeSeries ts;
  ts.values.resize(kStepsPerYear);
  double day_factor = 1.0;
  for (int t = 0; t < kStepsPerYear; ++t) {
    if (t % kStepsPerDay == 0)
      day_factor = std::exp(day_sigma * normal(rng) - 0.5 * day_sigma * day_sigma);
    ts.values[t] = scale * envelope[t] * day_factor * step_noise.next();
  }
  return ts;
}

TimeSeries pv_profile(std::uint64_t seed, double scale) {
  static const std::vector<double> clear_sky = normalized_envelope(pv_envelope);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  LognormalNoise passing_clouds(rng, 0.15, 0.9);
  TimeSeries ts;
  ts.values.resize(kStepsPerYear);
  double clearness = 1.0;
  for (int t = 0; t < kStepsPerYear; ++t) {
    const int day = t / kStepsPerDay;
    if (t % kStepsPerDay == 0) {
      // Overcast days are far more frequent in winter.
      const double p_overcast = 0.45 + 0.25 * std::cos(kTwoPi * (day - kMidJanuary) /
                                                       kDaysPerYear);
      clearness = uniform(rng) < p_overcast ? 0.15 + 0.25 * uniform(rng)
                                            : 0.7 + 0.3 * uniform(rng);
    }
    const double cloud = std::min(1.05, passing_clouds.next());
    ts.values[t] = clear_sky[t] > 0.0 ? scale * clear_sky[t] * clearness * cloud
                                      : 0.0;
  }
  return ts;
}

}  // namespace

TimeSeries synth_profile(ProfileKind kind, std::uint64_t seed, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("profile scale must be > 0");
  static const std::vector<double> household = normalized_envelope(household_envelope);
  static const std::vector<double> commercial = normalized_envelope(commercial_envelope);
  static const std::vector<double> industrial = normalized_envelope(industrial_envelope);
  switch (kind) {
    case ProfileKind::Household: return load_profile(household, seed, scale, 0.25, 0.10);
    case ProfileKind::Commercial: return load_profile(commercial, seed, scale, 0.05, 0.04);
    case ProfileKind::Industrial: return load_profile(industrial, seed, scale, 0.03, 0.03);
    case ProfileKind::Pv: return pv_profile(seed, scale);
  }
  throw std::invalid_argument("unknown profile kind");
}

TimeSeries q_from_constant_pf(const TimeSeries& p, double cos_phi) {
  if (!(cos_phi > 0.0 && cos_phi <= 1.0))
    throw std::invalid_argument("cos_phi must lie in (0, 1]");
  const double k = std::tan(std::acos(cos_phi));
  TimeSeries q = p;
  for (auto& v : q.values) v *= k;
  return q;
}

TimeSeries synth_reactive(const TimeSeries& p, ProfileKind kind,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool pv = kind == ProfileKind::Pv;
  const double centre = pv ? 0.975 : 0.95;
  const double lo = pv ? 0.95 : 0.90;
  const double hi = pv ? 1.0 : 0.995;
  const double sign = pv ? -1.0 : 1.0;
  constexpr double rho = 0.98;
  double drift = 0.0;
  TimeSeries q = p;
  for (auto& v : q.values) {
    drift = rho * drift + std::sqrt(1.0 - rho * rho) * normal(rng);
    const double cos_phi = std::clamp(centre + 0.025 * drift, lo, hi);
    v = sign * v * std::tan(std::acos(cos_phi));
  }
  return q;
}

ProfileSet build_profiles(const Grid& grid, const ProfileConfig& config) {
  ProfileSet out;
  for (const auto& a : grid.attachments) {
    if (out.contains(a.profile_id)) continue;
    const ProfileKind kind = profile_kind_of(a.profile_id);
    const std::uint64_t seed = derive_seed(config.seed, a.profile_id);
    ProfilePair pair;
    pair.p = synth_profile(kind, seed, 1.0);
    pair.q = config.reactive == ReactiveMode::ConstantPowerFactor
                 ? q_from_constant_pf(pair.p, config.cos_phi)
                 : synth_reactive(pair.p, kind, derive_seed(seed, "reactive"));
    out.emplace(a.profile_id, std::move(pair));
  }
  return out;
}

std::string profiles_to_csv(const ProfileSet& profiles) {
  std::string out = "t";
  for (const auto& [id, pair] : profiles) out += "," + id + ".p," + id + ".q";
  out += '\n';
  std::size_t n = profiles.empty() ? 0 : profiles.begin()->second.p.size();
  for (std::size_t t = 0; t < n; ++t) {
    out += std::to_string(t);
    for (const auto& [id, pair] : profiles) {
      out += ',';
      out += format_double(pair.p.values[t], 17);
      out += ',';
      out += format_double(pair.q.values[t], 17);
    }
    out += '\n';
  }
  return out;
}

ProfileSet profiles_from_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (table.header.empty() || table.header[0] != "t")
    throw std::runtime_error("profiles CSV must start with column 't'");
  if ((table.header.size() - 1) % 2 != 0)
    throw std::runtime_error("profiles CSV must have .p/.q column pairs");
  ProfileSet out;
  for (std::size_t c = 1; c < table.header.size(); c += 2) {
    const std::string& pcol = table.header[c];
    const std::string& qcol = table.header[c + 1];
    if (pcol.size() < 3 || pcol.substr(pcol.size() - 2) != ".p" ||
        qcol != pcol.substr(0, pcol.size() - 2) + ".q")
      throw std::runtime_error("bad profile column pair '" + pcol + "', '" +
                               qcol + "'");
    ProfilePair pair;
    pair.p.values = table.column(c);
    pair.q.values = table.column(c + 1);
    out.emplace(pcol.substr(0, pcol.size() - 2), std::move(pair));
  }
  return out;
}

}  // namespace gridsur
