#include "driftbench/assignment.hpp"

#include <map>

#include "driftbench/errors.hpp"

namespace driftbench {

Assignment Assignment::empty_for(const DomainSchema& s) {
  Assignment a;
  a.kind = s.kind;
  a.cells.assign(static_cast<std::size_t>(s.cell_count()), std::nullopt);
  return a;
}

Assignment Assignment::from_cells(const DomainSchema& s, const std::vector<int>& values) {
  if (static_cast<int>(values.size()) != s.cell_count()) {
    throw ContractError("cell vector does not match schema layout");
  }
  Assignment a = empty_for(s);
  for (std::size_t i = 0; i < values.size(); ++i) a.cells[i] = values[i];
  return a;
}

std::vector<int> Assignment::values() const {
  std::vector<int> out;
  out.reserve(cells.size());
  for (const auto& c : cells) {
    if (!c) throw ContractError("assignment is incomplete");
    out.push_back(*c);
  }
  return out;
}

std::string ValidationReport::summary() const {
  std::string out;
  auto add = [&out](const char* label, const std::vector<std::string>& items) {
    if (items.empty()) return;
    if (!out.empty()) out += "; ";
    out += label;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : " ") + items[i];
  };
  add("missing:", missing);
  add("duplicate:", duplicates);
  add("out of range:", out_of_range);
  return out;
}

ValidationReport schema_validate(const Assignment& a, const DomainSchema& s) {
  ValidationReport report;
  if (a.kind != s.kind || static_cast<int>(a.cells.size()) != s.cell_count()) {
    report.missing.push_back("assignment does not match the " + std::string(to_string(s.kind)) + " schema");
    return report;
  }
  for (int cell = 0; cell < s.cell_count(); ++cell) {
    if (!a.cells[cell]) {
      report.missing.push_back(s.cell_label(cell));
      continue;
    }
    auto [lo, hi] = s.cell_range(cell);
    if (*a.cells[cell] < lo || *a.cells[cell] > hi) {
      report.out_of_range.push_back(s.cell_label(cell) + "=" + std::to_string(*a.cells[cell]));
    }
  }

  switch (s.kind) {
    case DomainKind::LogicGrid:
      for (int c = 0; c < kLogicGridCategories; ++c) {
        std::map<int, std::vector<std::string>> holders;
        for (int e = 0; e < s.entity_count(); ++e) {
          const auto& v = a.cells[s.grid_cell(e, c)];
          if (v && *v >= 0 && *v < kLogicGridValues) holders[*v].push_back(s.entities[e]);
        }
        for (const auto& [value, who] : holders) {
          if (who.size() < 2) continue;
          std::string names;
          for (std::size_t i = 0; i < who.size(); ++i) names += (i ? "/" : "") + who[i];
          report.duplicates.push_back(s.categories[c].name + "=" + s.categories[c].values[value] + " (" + names + ")");
        }
      }
      break;
    case DomainKind::Scheduling:
      for (int e = 0; e < s.entity_count(); ++e) {
        const auto& start = a.cells[s.start_cell(e)];
        const auto& dur = a.cells[s.duration_cell(e)];
        if (start && dur && *start >= 1 && *dur >= 1 && *start + *dur - 1 > s.slot_count) {
          report.out_of_range.push_back(s.entities[e] + " ends after slot " + std::to_string(s.slot_count));
        }
      }
      break;
    case DomainKind::Seating: {
      std::map<int, std::vector<std::string>> holders;
      for (int e = 0; e < s.entity_count(); ++e) {
        const auto& v = a.cells[s.seat_cell(e)];
        if (v && *v >= 1 && *v <= s.seat_count()) holders[*v].push_back(s.entities[e]);
      }
      for (const auto& [seat, who] : holders) {
        if (who.size() < 2) continue;
        std::string names;
        for (std::size_t i = 0; i < who.size(); ++i) names += (i ? "/" : "") + who[i];
        report.duplicates.push_back("seat " + std::to_string(seat) + " (" + names + ")");
      }
      break;
    }
  }
  return report;
}

nlohmann::ordered_json assignment_to_json(const Assignment& a, const DomainSchema& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int e = 0; e < s.entity_count(); ++e) {
    const auto& name = s.entities[e];
    switch (s.kind) {
      case DomainKind::LogicGrid: {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (int c = 0; c < kLogicGridCategories; ++c) {
          const auto& v = a.cells[s.grid_cell(e, c)];
          if (v && *v >= 0 && *v < kLogicGridValues) row[s.categories[c].name] = s.categories[c].values[*v];
        }
        if (!row.empty()) j[name] = std::move(row);
        break;
      }
      case DomainKind::Scheduling: {
        const auto& start = a.cells[s.start_cell(e)];
        if (!start) break;
        nlohmann::ordered_json slot = {{"start", *start}};
        if (const auto& dur = a.cells[s.duration_cell(e)]) slot["duration"] = *dur;
        j[name] = std::move(slot);
        break;
      }
      case DomainKind::Seating:
        if (const auto& seat = a.cells[s.seat_cell(e)]) j[name] = *seat;
        break;
    }
  }
  return j;
}

}  // namespace driftbench
