// Benchmark grid fixtures.
//
// Element counts follow the two reference LV systems (44 buses / 15 loads and
// 128 buses / 118 loads / 17 PV plants). Cable, line and transformer data are
// stand-ins: typical European LV cable and overhead-line parameters chosen so
// the yearly voltage band resembles the reference grids. They are not the
// published benchmark data.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridsur/grid.hpp"

namespace gridsur {

namespace {

struct LineType {
  double r, x, c;  // ohm/km, ohm/km, nF/km
};

// Underground cables and overhead lines, per-phase positive sequence.
constexpr LineType kMvCable{0.122, 0.112, 300.0};
constexpr LineType kUg1{0.162, 0.0832, 210.0};
constexpr LineType kUg2{0.2647, 0.0823, 210.0};
constexpr LineType kUg3{0.822, 0.0847, 210.0};
constexpr LineType kOh1{0.4917, 0.2847, 10.0};
constexpr LineType kOh2{1.3207, 0.321, 10.0};
constexpr LineType kOh3{2.0167, 0.3343, 10.0};
constexpr LineType kNayy150{0.208, 0.08, 261.0};
constexpr LineType kNayy50{0.642, 0.083, 210.0};

class GridBuilder {
 public:
  explicit GridBuilder(double base_mva) { g_.base_mva = base_mva; }

  int bus(std::string name, double vn_kv, BusKind kind = BusKind::PQ,
          std::optional<std::string> subgrid = std::nullopt) {
    const int id = static_cast<int>(g_.buses.size());
    g_.buses.push_back({id, std::move(name), kind, vn_kv, std::move(subgrid)});
    return id;
  }

  void line(int from, int to, const LineType& t, double length_km) {
    g_.lines.push_back({from, to, t.r, t.x, t.c, length_km});
  }

  void trafo(int hv, int lv, double sn_mva, double vk, double vkr) {
    g_.transformers.push_back({hv, lv, sn_mva, vk, vkr,
                               g_.buses[hv].vn_kv / g_.buses[lv].vn_kv});
  }

  void attach(int bus, AttachmentKind kind, std::string profile_id,
              double scaling) {
    g_.attachments.push_back({bus, kind, std::move(profile_id), scaling});
  }

  Grid take() { return std::move(g_); }

 private:
  Grid g_;
};

constexpr double kCosPhi = 0.9;

Grid cigre_lv_like() {
  GridBuilder b(1.0);
  const int mv = b.bus("Bus 0", 20.0, BusKind::Slack);

  // Residential subgrid: R0 (MV side), R1..R18.
  std::array<int, 19> r{};
  r[0] = b.bus("Bus R0", 20.0, BusKind::PQ, "residential");
  for (int i = 1; i <= 18; ++i)
    r[i] = b.bus("Bus R" + std::to_string(i), 0.4, BusKind::PQ, "residential");

  // Industrial subgrid: I0 (MV side), I1, I2.
  std::array<int, 3> ind{};
  ind[0] = b.bus("Bus I0", 20.0, BusKind::PQ, "industrial");
  for (int i = 1; i <= 2; ++i)
    ind[i] = b.bus("Bus I" + std::to_string(i), 0.4, BusKind::PQ, "industrial");

  // Commercial subgrid: C0 (MV side), C1..C20.
  std::array<int, 21> c{};
  c[0] = b.bus("Bus C0", 20.0, BusKind::PQ, "commercial");
  for (int i = 1; i <= 20; ++i)
    c[i] = b.bus("Bus C" + std::to_string(i), 0.4, BusKind::PQ, "commercial");

  // MV feeders to the three secondary substations.
  b.line(mv, r[0], kMvCable, 0.1);
  b.line(mv, ind[0], kMvCable, 0.1);
  b.line(mv, c[0], kMvCable, 0.1);

  b.trafo(r[0], r[1], 0.5, 4.0, 1.0);
  b.trafo(ind[0], ind[1], 0.15, 4.0, 1.0);
  b.trafo(c[0], c[1], 0.3, 4.0, 1.0);

  // Residential feeder.
  for (int i = 1; i <= 9; ++i) b.line(r[i], r[i + 1], kUg1, 0.035);
  b.line(r[3], r[11], kUg3, 0.030);
  b.line(r[4], r[12], kUg1, 0.035);
  b.line(r[12], r[13], kUg1, 0.035);
  b.line(r[13], r[14], kUg1, 0.035);
  b.line(r[14], r[15], kUg3, 0.030);
  b.line(r[6], r[16], kUg3, 0.030);
  b.line(r[9], r[17], kUg3, 0.030);
  b.line(r[10], r[18], kUg3, 0.030);

  b.line(ind[1], ind[2], kUg2, 0.2);

  // Commercial overhead network.
  for (int i = 1; i <= 8; ++i) b.line(c[i], c[i + 1], kOh1, 0.030);
  b.line(c[3], c[10], kOh2, 0.030);
  b.line(c[10], c[11], kOh2, 0.030);
  b.line(c[11], c[12], kOh3, 0.030);
  b.line(c[11], c[13], kOh3, 0.030);
  b.line(c[10], c[14], kOh3, 0.030);
  b.line(c[5], c[15], kOh2, 0.030);
  b.line(c[15], c[16], kOh2, 0.030);
  b.line(c[15], c[17], kOh3, 0.030);
  b.line(c[16], c[18], kOh3, 0.030);
  b.line(c[8], c[19], kOh3, 0.030);
  b.line(c[9], c[20], kOh3, 0.030);

  // Peak apparent power in kVA; attachment scaling is peak active power in MW.
  auto load = [&](int bus, const std::string& kind, const std::string& tag,
                  double kva) {
    b.attach(bus, AttachmentKind::Load, kind + "_" + tag,
             kva * kCosPhi / 1000.0);
  };
  load(r[1], "household", "R1", 200.0);
  load(r[11], "household", "R11", 15.0);
  load(r[15], "household", "R15", 52.0);
  load(r[16], "household", "R16", 55.0);
  load(r[17], "household", "R17", 35.0);
  load(r[18], "household", "R18", 47.0);
  load(ind[2], "industrial", "I2", 100.0);
  load(c[1], "commercial", "C1", 120.0);
  load(c[12], "commercial", "C12", 20.0);
  load(c[13], "commercial", "C13", 20.0);
  load(c[14], "commercial", "C14", 25.0);
  load(c[17], "commercial", "C17", 25.0);
  load(c[18], "commercial", "C18", 8.0);
  load(c[19], "commercial", "C19", 16.0);
  load(c[20], "commercial", "C20", 8.0);
  return b.take();
}

Grid rural_lv_like() {
  GridBuilder b(1.0);
  const int mv = b.bus("MV 0", 20.0, BusKind::Slack);
  const int lv = b.bus("LV busbar", 0.4, BusKind::PQ, "residential");
  b.trafo(mv, lv, 0.4, 4.0, 1.2);

  // Six radial feeders of 21 buses: a 15-bus main cable with a 6-bus branch
  // leaving main bus 7.
  constexpr int kFeeders = 6, kMain = 15, kBranch = 6, kBranchAt = 7;
  int load_index = 0;
  std::vector<int> all_load_buses;
  for (int f = 0; f < kFeeders; ++f) {
    std::array<int, kMain> main{};
    std::array<int, kBranch> branch{};
    const std::string prefix = "F" + std::to_string(f + 1) + ".";
    for (int k = 0; k < kMain; ++k)
      main[k] = b.bus(prefix + std::to_string(k + 1), 0.4, BusKind::PQ,
                      "residential");
    for (int k = 0; k < kBranch; ++k)
      branch[k] = b.bus(prefix + "b" + std::to_string(k + 1), 0.4,
                        BusKind::PQ, "residential");

    b.line(lv, main[0], kNayy150, 0.060);
    for (int k = 0; k + 1 < kMain; ++k)
      b.line(main[k], main[k + 1], kNayy150, 0.025 + 0.005 * (k % 3));
    b.line(main[kBranchAt], branch[0], kNayy50, 0.030);
    for (int k = 0; k + 1 < kBranch; ++k)
      b.line(branch[k], branch[k + 1], kNayy50, 0.020 + 0.005 * (k % 2));

    // Cable distribution cabinets carry no load: every feeder's first bus
    // and, on the first two feeders, the branch junction.
    std::vector<int> load_buses;
    for (int k = 1; k < kMain; ++k)
      if (!(f < 2 && k == kBranchAt)) load_buses.push_back(main[k]);
    for (int k = 0; k < kBranch; ++k) load_buses.push_back(branch[k]);

    for (int bus : load_buses) {
      const double kw = 1.5 + 0.5 * (load_index % 5) + 0.25 * (load_index % 3);
      b.attach(bus, AttachmentKind::Load,
               "household_H" + std::to_string(load_index + 1), kw / 1000.0);
      all_load_buses.push_back(bus);
      ++load_index;
    }
  }

  // PV plants on every seventh load bus (17 of 118).
  int pv_index = 0;
  for (std::size_t i = 3; i < all_load_buses.size() && pv_index < 17; i += 7) {
    const double kwp = 20.0 + 5.0 * (pv_index % 4);
    b.attach(all_load_buses[i], AttachmentKind::SGen,
             "pv_P" + std::to_string(pv_index + 1), kwp / 1000.0);
    ++pv_index;
  }
  return b.take();
}

}  // namespace

Grid build_fixture(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::CigreLvLike: return cigre_lv_like();
    case FixtureKind::RuralLvLike: return rural_lv_like();
  }
  throw std::invalid_argument("unknown fixture kind");
}

std::string fixture_notes(FixtureKind kind) {
  const std::string common =
      " Line, cable and transformer parameters are typical LV values used as "
      "stand-ins; they are not published benchmark data. Attachment scaling "
      "is peak active power in MW applied to a unit-peak profile whose kind "
      "is the profile_id prefix (household, commercial, industrial, pv).";
  switch (kind) {
    case FixtureKind::CigreLvLike:
      return "CIGRE-like LV benchmark: 44 buses, 15 loads in residential, "
             "industrial and commercial subgrids behind three MV/LV "
             "transformers; loads at cos phi 0.9." +
             common;
    case FixtureKind::RuralLvLike:
      return "Rural-like LV feeder system: 128 buses, 118 household loads, 17 "
             "PV plants on six radial cable feeders behind one MV/LV "
             "transformer." +
             common;
  }
  return common;
}

FixtureKind parse_fixture_kind(std::string_view name) {
  if (name == "cigre-lv-like") return FixtureKind::CigreLvLike;
  if (name == "rural-lv-like") return FixtureKind::RuralLvLike;
  throw std::invalid_argument("unknown fixture '" + std::string(name) +
                              "' (expected cigre-lv-like or rural-lv-like)");
}

std::string_view to_string(FixtureKind kind) {
  return kind == FixtureKind::CigreLvLike ? "cigre-lv-like" : "rural-lv-like";
}

}  // namespace gridsur
