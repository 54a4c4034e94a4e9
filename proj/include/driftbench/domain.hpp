#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace driftbench {

enum class DomainKind { LogicGrid, Scheduling, Seating };

inline constexpr std::array<DomainKind, 3> kAllDomains = {
    DomainKind::LogicGrid, DomainKind::Scheduling, DomainKind::Seating};

std::string_view to_string(DomainKind kind);
/// Throws ValidationError on an unknown name.
DomainKind domain_from_string(std::string_view name);

enum class TableShape { Round, Rectangular };

std::string_view to_string(TableShape shape);
TableShape table_from_string(std::string_view name);

struct Category {
  std::string name;
  std::vector<std::string> values;  // declaration order is the value order

  friend bool operator==(const Category&, const Category&) = default;
};

inline constexpr int kLogicGridEntities = 4;
inline constexpr int kLogicGridCategories = 3;
inline constexpr int kLogicGridValues = 4;
inline constexpr int kDefaultSlotCount = 10;
inline constexpr int kDefaultMaxDuration = 3;

/// Structural description of one problem instance.
///
/// Every domain is flattened onto integer cells so that solver, assignment
/// and parser share one layout:
///   logic_grid  cell(e, c) = e * 3 + c, value = index into category values
///   scheduling  start(e) = 2e, duration(e) = 2e + 1
///   seating     seat(e) = e, value in 1..P
struct DomainSchema {
  DomainKind kind = DomainKind::LogicGrid;
  std::vector<std::string> entities;
  std::vector<Category> categories;      // logic_grid only
  int slot_count = kDefaultSlotCount;    // scheduling only
  int max_duration = kDefaultMaxDuration;
  TableShape table = TableShape::Round;  // seating only

  int entity_count() const { return static_cast<int>(entities.size()); }
  int seat_count() const { return entity_count(); }
  int cell_count() const;

  /// Case-insensitive lookup.
  std::optional<int> entity_index(std::string_view name) const;
  std::optional<int> category_index(std::string_view name) const;
  std::optional<int> value_index(int category, std::string_view value) const;

  int grid_cell(int entity, int category) const { return entity * kLogicGridCategories + category; }
  int start_cell(int entity) const { return 2 * entity; }
  int duration_cell(int entity) const { return 2 * entity + 1; }
  int seat_cell(int entity) const { return entity; }

  /// Inclusive value bounds of a cell.
  std::pair<int, int> cell_range(int cell) const;
  /// Human label such as "Drew.pet", "QA.start" or "Karen".
  std::string cell_label(int cell) const;

  friend bool operator==(const DomainSchema&, const DomainSchema&) = default;
};

/// Throws ValidationError when the structural invariants of the domain fail.
void validate_schema(const DomainSchema& schema);

DomainSchema make_logic_grid(std::vector<std::string> entities, std::vector<Category> categories);
DomainSchema make_scheduling(std::vector<std::string> events, int slot_count = kDefaultSlotCount,
                             int max_duration = kDefaultMaxDuration);
DomainSchema make_seating(std::vector<std::string> people, TableShape table);

/// One-paragraph description used for the turn-1 setup block.
std::string describe_context(const DomainSchema& schema);

nlohmann::ordered_json schema_to_json(const DomainSchema& schema);
DomainSchema schema_from_json(const nlohmann::json& j);

// Seat geometry. Round tables wrap (seat P touches seat 1); rectangular
// tables are two facing rows of P/2 seats with linear adjacency.
namespace seating {
bool adjacent(const DomainSchema& s, int seat_a, int seat_b);
int distance(const DomainSchema& s, int seat_a, int seat_b);
int max_distance(const DomainSchema& s);
bool opposite(const DomainSchema& s, int seat_a, int seat_b);
/// True when seat_b is the seat immediately after seat_a.
bool left_of(const DomainSchema& s, int seat_a, int seat_b);
}  // namespace seating

std::string to_lower(std::string_view text);

}  // namespace driftbench
