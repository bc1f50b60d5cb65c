#include "gridsur/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gridsur/util.hpp"
#include "json.hpp"

namespace gridsur {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int Grid::slack_bus() const {
  for (const auto& b : buses)
    if (b.kind == BusKind::Slack) return b.id;
  throw std::logic_error("grid has no slack bus");
}

std::size_t Grid::count(AttachmentKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      attachments.begin(), attachments.end(),
      [kind](const Attachment& a) { return a.kind == kind; }));
}

std::string Grid::attachment_label(std::size_t i) const {
  const auto kind = attachments.at(i).kind;
  std::size_t ordinal = 0;
  for (std::size_t k = 0; k < i; ++k)
    if (attachments[k].kind == kind) ++ordinal;
  return (kind == AttachmentKind::Load ? "load" : "sgen") +
         std::to_string(ordinal);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::NoSlack: return "NoSlack";
    case ViolationKind::MultipleSlack: return "MultipleSlack";
    case ViolationKind::NonDenseIds: return "NonDenseIds";
    case ViolationKind::Disconnected: return "Disconnected";
    case ViolationKind::DanglingReference: return "DanglingReference";
    case ViolationKind::SelfLoop: return "SelfLoop";
    case ViolationKind::InvalidValue: return "InvalidValue";
  }
  return "?";
}

std::string Violation::to_string() const {
  std::string s(gridsur::to_string(kind));
  if (!element.empty()) s += "(" + element + ")";
  if (!detail.empty()) s += ": " + detail;
  return s;
}

namespace {

std::string join_violations(const std::vector<Violation>& v) {
  std::string s = "invalid grid:";
  for (const auto& x : v) s += "\n  " + x.to_string();
  return s;
}

// Union-find over bus ids; only used on in-range references.
struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

GridValidationError::GridValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> validate_grid(const Grid& grid) {
  std::vector<Violation> out;
  const int n = static_cast<int>(grid.buses.size());
  auto valid_bus = [n](int id) { return id >= 0 && id < n; };
  auto bad = [&out](std::string element, std::string detail) {
    out.push_back({ViolationKind::InvalidValue, std::move(element),
                   std::move(detail)});
  };

  if (!(grid.base_mva > 0) || !std::isfinite(grid.base_mva))
    bad("grid", "base_mva must be > 0");

  int slack_count = 0;
  for (int i = 0; i < n; ++i) {
    const auto& b = grid.buses[i];
    const std::string el = "bus " + std::to_string(i);
    if (b.id != i)
      out.push_back({ViolationKind::NonDenseIds, el,
                     "id " + std::to_string(b.id) + " at position " +
                         std::to_string(i)});
    if (!(b.vn_kv > 0) || !std::isfinite(b.vn_kv)) bad(el, "vn_kv must be > 0");
    if (b.kind == BusKind::Slack) ++slack_count;
  }
  if (slack_count == 0) out.push_back({ViolationKind::NoSlack, "", ""});
  if (slack_count > 1)
    out.push_back({ViolationKind::MultipleSlack, "",
                   std::to_string(slack_count) + " slack buses"});

  DisjointSets sets(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < grid.lines.size(); ++i) {
    const auto& l = grid.lines[i];
    const std::string el = "line " + std::to_string(i);
    bool ends_ok = true;
    for (int end : {l.from_bus, l.to_bus}) {
      if (!valid_bus(end)) {
        out.push_back({ViolationKind::DanglingReference, el,
                       "bus " + std::to_string(end) + " does not exist"});
        ends_ok = false;
      }
    }
    if (l.from_bus == l.to_bus)
      out.push_back({ViolationKind::SelfLoop, el, "from_bus == to_bus"});
    if (!(l.length_km > 0)) bad(el, "length_km must be > 0");
    if (!(l.x_ohm_per_km > 0)) bad(el, "x_ohm_per_km must be > 0");
    if (!(l.r_ohm_per_km >= 0)) bad(el, "r_ohm_per_km must be >= 0");
    if (!(l.c_nf_per_km >= 0)) bad(el, "c_nf_per_km must be >= 0");
    if (ends_ok) sets.unite(l.from_bus, l.to_bus);
  }
  for (std::size_t i = 0; i < grid.transformers.size(); ++i) {
    const auto& t = grid.transformers[i];
    const std::string el = "transformer " + std::to_string(i);
    bool ends_ok = true;
    for (int end : {t.hv_bus, t.lv_bus}) {
      if (!valid_bus(end)) {
        out.push_back({ViolationKind::DanglingReference, el,
                       "bus " + std::to_string(end) + " does not exist"});
        ends_ok = false;
      }
    }
    if (t.hv_bus == t.lv_bus)
      out.push_back({ViolationKind::SelfLoop, el, "hv_bus == lv_bus"});
    if (!(t.sn_mva > 0)) bad(el, "sn_mva must be > 0");
    if (!(t.vkr_percent >= 0 && t.vkr_percent <= t.vk_percent))
      bad(el, "requires 0 <= vkr_percent <= vk_percent");
    if (!(t.vk_percent > 0)) bad(el, "vk_percent must be > 0");
    if (!(t.ratio > 0)) bad(el, "ratio must be > 0");
    if (ends_ok) sets.unite(t.hv_bus, t.lv_bus);
  }
  for (std::size_t i = 0; i < grid.attachments.size(); ++i) {
    const auto& a = grid.attachments[i];
    const std::string el = "attachment " + std::to_string(i);
    if (!valid_bus(a.bus))
      out.push_back({ViolationKind::DanglingReference, el,
                     "bus " + std::to_string(a.bus) + " does not exist"});
    if (!(a.scaling >= 0) || !std::isfinite(a.scaling))
      bad(el, "scaling must be >= 0");
    if (a.profile_id.empty()) bad(el, "profile_id is empty");
  }

  if (n > 0) {
    int root = -1;
    for (int i = 0; i < n; ++i)
      if (grid.buses[i].kind == BusKind::Slack) {
        root = i;
        break;
      }
    if (root < 0) root = 0;
    for (int i = 0; i < n; ++i)
      if (sets.find(i) != sets.find(root))
        out.push_back({ViolationKind::Disconnected, "bus " + std::to_string(i),
                       "not connected to bus " + std::to_string(root)});
  }
  return out;
}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("expected an object");
  }

  template <typename T>
  T get(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) fail(std::string("missing field '") + key + "'");
    try {
      return it->get<T>();
    } catch (const json::exception& e) {
      fail(std::string("field '") + key + "': " + e.what());
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw GridParseError(path_ + ": " + msg, 0, 0, 0);
  }

 private:
  const json& obj_;
  std::string path_;
};

const json& array_field(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end())
    throw GridParseError(std::string("missing top-level key '") + key + "'",
                         0, 0, 0);
  if (!it->is_array())
    throw GridParseError(std::string("'") + key + "' must be an array", 0, 0,
                         0);
  return *it;
}

BusKind parse_bus_kind(const std::string& s, const FieldReader& r) {
  if (s == "Slack") return BusKind::Slack;
  if (s == "PQ") return BusKind::PQ;
  r.fail("unknown bus kind '" + s + "'");
}

AttachmentKind parse_attachment_kind(const std::string& s,
                                     const FieldReader& r) {
  if (s == "Load") return AttachmentKind::Load;
  if (s == "SGen") return AttachmentKind::SGen;
  r.fail("unknown attachment kind '" + s + "'");
}

}  // namespace

Grid parse_grid(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    auto [line, col] = line_column(text, byte);
    throw GridParseError("syntax error at line " + std::to_string(line) +
                             ", column " + std::to_string(col) + ": " +
                             e.what(),
                         byte, line, col);
  }
  if (!root.is_object())
    throw GridParseError("top level must be an object", 0, 0, 0);

  Grid g;
  {
    FieldReader top(root, "grid");
    g.base_mva = top.get<double>("base_mva");
  }
  const auto& buses = array_field(root, "buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    FieldReader r(buses[i], "buses[" + std::to_string(i) + "]");
    Bus b;
    b.id = r.get<int>("id");
    b.name = r.get<std::string>("name");
    b.kind = parse_bus_kind(r.get<std::string>("kind"), r);
    b.vn_kv = r.get<double>("vn_kv");
    if (auto it = buses[i].find("subgrid");
        it != buses[i].end() && !it->is_null())
      b.subgrid = r.get<std::string>("subgrid");
    g.buses.push_back(std::move(b));
  }
  const auto& lines = array_field(root, "lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    FieldReader r(lines[i], "lines[" + std::to_string(i) + "]");
    g.lines.push_back({r.get<int>("from_bus"), r.get<int>("to_bus"),
                       r.get<double>("r_ohm_per_km"),
                       r.get<double>("x_ohm_per_km"),
                       r.get<double>("c_nf_per_km"),
                       r.get<double>("length_km")});
  }
  const auto& trafos = array_field(root, "transformers");
  for (std::size_t i = 0; i < trafos.size(); ++i) {
    FieldReader r(trafos[i], "transformers[" + std::to_string(i) + "]");
    g.transformers.push_back(
        {r.get<int>("hv_bus"), r.get<int>("lv_bus"), r.get<double>("sn_mva"),
         r.get<double>("vk_percent"), r.get<double>("vkr_percent"),
         r.get<double>("ratio")});
  }
  const auto& atts = array_field(root, "attachments");
  for (std::size_t i = 0; i < atts.size(); ++i) {
    FieldReader r(atts[i], "attachments[" + std::to_string(i) + "]");
    g.attachments.push_back(
        {r.get<int>("bus"), parse_attachment_kind(r.get<std::string>("kind"), r),
         r.get<std::string>("profile_id"), r.get<double>("scaling")});
  }

  if (auto v = validate_grid(g); !v.empty())
    throw GridValidationError(std::move(v));
  return g;
}

Grid load_grid(const std::string& path) { return parse_grid(read_file(path)); }

std::string serialize_grid(const Grid& grid, const std::string& notes) {
  json root = json::object();
  if (!notes.empty()) root["notes"] = notes;
  root["base_mva"] = grid.base_mva;
  json buses = json::array();
  for (const auto& b : grid.buses) {
    json jb = {{"id", b.id},
               {"name", b.name},
               {"kind", b.kind == BusKind::Slack ? "Slack" : "PQ"},
               {"vn_kv", b.vn_kv}};
    jb["subgrid"] = b.subgrid ? json(*b.subgrid) : json(nullptr);
    buses.push_back(std::move(jb));
  }
  root["buses"] = std::move(buses);
  json lines = json::array();
  for (const auto& l : grid.lines)
    lines.push_back({{"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"r_ohm_per_km", l.r_ohm_per_km},
                     {"x_ohm_per_km", l.x_ohm_per_km},
                     {"c_nf_per_km", l.c_nf_per_km},
                     {"length_km", l.length_km}});
  root["lines"] = std::move(lines);
  json trafos = json::array();
  for (const auto& t : grid.transformers)
    trafos.push_back({{"hv_bus", t.hv_bus},
                      {"lv_bus", t.lv_bus},
                      {"sn_mva", t.sn_mva},
                      {"vk_percent", t.vk_percent},
                      {"vkr_percent", t.vkr_percent},
                      {"ratio", t.ratio}});
  root["transformers"] = std::move(trafos);
  json atts = json::array();
  for (const auto& a : grid.attachments)
    atts.push_back({{"bus", a.bus},
                    {"kind", a.kind == AttachmentKind::Load ? "Load" : "SGen"},
                    {"profile_id", a.profile_id},
                    {"scaling", a.scaling}});
  root["attachments"] = std::move(atts);
  return root.dump(1) + "\n";
}

std::uint64_t grid_hash(const Grid& grid) { return fnv1a(serialize_grid(grid)); }

}  // namespace gridsur
