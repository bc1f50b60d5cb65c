#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridsur/grid.hpp"

namespace gridsur {

inline constexpr int kStepMinutes = 15;
inline constexpr int kStepsPerDay = 24 * 60 / kStepMinutes;
inline constexpr int kDaysPerYear = 365;
inline constexpr int kStepsPerYear = kStepsPerDay * kDaysPerYear;  // 35040
inline constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30,
                                                     31, 31, 30, 31, 30, 31};

/// Calendar month 1..12 of a step in the non-leap reference year.
[[nodiscard]] int month_of_step(int step);
/// 0 = Monday. The reference year starts on a Tuesday.
[[nodiscard]] int weekday_of_day(int day);

/// One year of 15-minute averages starting Jan 1 00:00.
struct TimeSeries {
  int step_minutes = kStepMinutes;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  bool operator==(const TimeSeries&) const = default;
};

enum class ProfileKind { Household, Commercial, Industrial, Pv };

/// Kind from a profile id prefix: "household_*", "commercial_*",
/// "industrial_*" or "pv_*".
[[nodiscard]] ProfileKind profile_kind_of(std::string_view profile_id);
[[nodiscard]] std::string_view to_string(ProfileKind kind);

/// Synthetic active-power profile. `scale` is the peak of the noise-free
/// envelope in MW; noisy values may exceed it. Deterministic in `seed`.
[[nodiscard]] TimeSeries synth_profile(ProfileKind kind, std::uint64_t seed,
                                       double scale);

/// Q_t = P_t tan(arccos(cos_phi)). Throws std::invalid_argument unless
/// 0 < cos_phi <= 1.
[[nodiscard]] TimeSeries q_from_constant_pf(const TimeSeries& p, double cos_phi);

/// Reactive series with a slowly drifting power factor. Loads draw
/// inductive Q (cos phi roughly 0.90..0.99); PV absorbs Q (cos phi 0.95..1).
[[nodiscard]] TimeSeries synth_reactive(const TimeSeries& p, ProfileKind kind,
                                        std::uint64_t seed);

enum class ReactiveMode { ConstantPowerFactor, Independent };

struct ProfileConfig {
  std::uint64_t seed = 42;
  ReactiveMode reactive = ReactiveMode::ConstantPowerFactor;
  double cos_phi = 0.9;
};

struct ProfilePair {
  TimeSeries p;  // MW per unit of attachment scaling
  TimeSeries q;  // Mvar per unit of attachment scaling

  bool operator==(const ProfilePair&) const = default;
};

using ProfileSet = std::map<std::string, ProfilePair>;

/// Unit-peak profiles for every distinct profile_id of the grid's
/// attachments; each profile's seed is derived from config.seed and its id.
[[nodiscard]] ProfileSet build_profiles(const Grid& grid,
                                        const ProfileConfig& config);

/// CSV with header `t,<id>.p,<id>.q,...`; t is the step index.
[[nodiscard]] std::string profiles_to_csv(const ProfileSet& profiles);
[[nodiscard]] ProfileSet profiles_from_csv(std::string_view text);

}  // namespace gridsur
