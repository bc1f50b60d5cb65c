#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridsur {

enum class BusKind { Slack, PQ };
enum class AttachmentKind { Load, SGen };

struct Bus {
  int id = 0;
  std::string name;
  BusKind kind = BusKind::PQ;
  double vn_kv = 0.4;
  std::optional<std::string> subgrid;

  bool operator==(const Bus&) const = default;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double r_ohm_per_km = 0.0;
  double x_ohm_per_km = 0.0;
  double c_nf_per_km = 0.0;
  double length_km = 0.0;

  bool operator==(const Line&) const = default;
};

struct Transformer {
  int hv_bus = 0;
  int lv_bus = 0;
  double sn_mva = 0.0;
  double vk_percent = 0.0;
  double vkr_percent = 0.0;
  /// hv/lv voltage ratio; equal to the ratio of the two bus nominal voltages
  /// for a transformer without off-nominal tap.
  double ratio = 1.0;

  bool operator==(const Transformer&) const = default;
};

/// A load or static generator fed by a named time series. Power drawn from
/// (Load) or fed into (SGen) the bus is `scaling` times the profile value.
struct Attachment {
  int bus = 0;
  AttachmentKind kind = AttachmentKind::Load;
  std::string profile_id;
  double scaling = 1.0;

  bool operator==(const Attachment&) const = default;
};

/// Low-voltage grid in physical units. Immutable once validated; share by
/// const reference.
struct Grid {
  double base_mva = 1.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Transformer> transformers;
  std::vector<Attachment> attachments;

  bool operator==(const Grid&) const = default;

  [[nodiscard]] int slack_bus() const;
  [[nodiscard]] std::size_t count(AttachmentKind kind) const;
  /// Column label for attachment i, e.g. "load3" or "sgen120".
  [[nodiscard]] std::string attachment_label(std::size_t i) const;
};

enum class ViolationKind {
  NoSlack,
  MultipleSlack,
  NonDenseIds,
  Disconnected,
  DanglingReference,
  SelfLoop,
  InvalidValue,
};

struct Violation {
  ViolationKind kind;
  std::string element;  // e.g. "bus 12", "line 3", "attachment 7"
  std::string detail;

  [[nodiscard]] std::string to_string() const;
};

[[nodiscard]] std::string_view to_string(ViolationKind kind);

/// Syntax error in grid JSON. `line`/`column` are 1-based.
class GridParseError : public std::runtime_error {
 public:
  GridParseError(const std::string& what, std::size_t byte, std::size_t line,
                 std::size_t column)
      : std::runtime_error(what), byte_(byte), line_(line), column_(column) {}
  [[nodiscard]] std::size_t byte() const { return byte_; }
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t byte_, line_, column_;
};

/// Grid was well formed but breaks an invariant.
class GridValidationError : public std::runtime_error {
 public:
  explicit GridValidationError(std::vector<Violation> violations);
  [[nodiscard]] const std::vector<Violation>& violations() const {
    return violations_;
  }

 private:
  std::vector<Violation> violations_;
};

[[nodiscard]] std::vector<Violation> validate_grid(const Grid& grid);

/// Parses and validates grid JSON. Throws GridParseError on malformed
/// input (including missing or mistyped fields) and GridValidationError
/// on invariant violations.
[[nodiscard]] Grid parse_grid(std::string_view text);
[[nodiscard]] Grid load_grid(const std::string& path);

/// Serializes to the grid JSON schema. `notes`, when given, is written as a
/// free-text top-level key that parse_grid ignores.
[[nodiscard]] std::string serialize_grid(const Grid& grid,
                                         const std::string& notes = {});

/// 64-bit FNV-1a of the canonical serialization.
[[nodiscard]] std::uint64_t grid_hash(const Grid& grid);

enum class FixtureKind { CigreLvLike, RuralLvLike };

[[nodiscard]] Grid build_fixture(FixtureKind kind);
[[nodiscard]] std::string fixture_notes(FixtureKind kind);
[[nodiscard]] FixtureKind parse_fixture_kind(std::string_view name);
[[nodiscard]] std::string_view to_string(FixtureKind kind);

}  // namespace gridsur
