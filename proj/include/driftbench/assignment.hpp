#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftbench/domain.hpp"

namespace driftbench {

/// Values per schema cell; unset cells are std::nullopt.
struct Assignment {
  DomainKind kind = DomainKind::LogicGrid;
  std::vector<std::optional<int>> cells;

  static Assignment empty_for(const DomainSchema& s);
  static Assignment from_cells(const DomainSchema& s, const std::vector<int>& values);

  bool is_set(int cell) const { return cells[cell].has_value(); }
  /// Only valid for complete assignments.
  std::vector<int> values() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct ValidationReport {
  std::vector<std::string> missing;
  std::vector<std::string> duplicates;
  std::vector<std::string> out_of_range;

  bool complete() const { return missing.empty() && duplicates.empty() && out_of_range.empty(); }
  std::string summary() const;
};

/// Every entity assigned exactly once, bijections intact, values in range.
ValidationReport schema_validate(const Assignment& a, const DomainSchema& s);

/// Answer JSON in the per-domain shape the verifier parses:
///   logic_grid {entity: {category: value}}
///   scheduling {event: {"start": int, "duration": int}}
///   seating    {person: int}
nlohmann::ordered_json assignment_to_json(const Assignment& a, const DomainSchema& s);

}  // namespace driftbench
