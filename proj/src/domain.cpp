#include "driftbench/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>

#include "driftbench/errors.hpp"

namespace driftbench {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::LogicGrid: return "logic_grid";
    case DomainKind::Scheduling: return "scheduling";
    case DomainKind::Seating: return "seating";
  }
  return "?";
}

DomainKind domain_from_string(std::string_view name) {
  for (auto kind : kAllDomains) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown domain '" + std::string(name) + "'");
}

std::string_view to_string(TableShape shape) {
  return shape == TableShape::Round ? "round" : "rectangular";
}

TableShape table_from_string(std::string_view name) {
  if (name == "round") return TableShape::Round;
  if (name == "rectangular") return TableShape::Rectangular;
  throw ValidationError("unknown table shape '" + std::string(name) + "'");
}

int DomainSchema::cell_count() const {
  switch (kind) {
    case DomainKind::LogicGrid: return entity_count() * kLogicGridCategories;
    case DomainKind::Scheduling: return entity_count() * 2;
    case DomainKind::Seating: return entity_count();
  }
  return 0;
}

namespace {

std::optional<int> find_ci(const std::vector<std::string>& names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].size() != name.size()) continue;
    bool same = true;
    for (std::size_t k = 0; k < name.size() && same; ++k) {
      same = std::tolower(static_cast<unsigned char>(names[i][k])) ==
             std::tolower(static_cast<unsigned char>(name[k]));
    }
    if (same) return static_cast<int>(i);
  }
  return std::nullopt;
}

void require_unique(const std::vector<std::string>& names, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw ValidationError(what + " names must be non-empty");
    if (!seen.insert(to_lower(n)).second) {
      throw ValidationError("duplicate " + what + " name '" + n + "'");
    }
  }
}

}  // namespace

std::optional<int> DomainSchema::entity_index(std::string_view name) const {
  return find_ci(entities, name);
}

std::optional<int> DomainSchema::category_index(std::string_view name) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (to_lower(categories[i].name) == to_lower(name)) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> DomainSchema::value_index(int category, std::string_view value) const {
  if (category < 0 || category >= static_cast<int>(categories.size())) return std::nullopt;
  return find_ci(categories[category].values, value);
}

std::pair<int, int> DomainSchema::cell_range(int cell) const {
  switch (kind) {
    case DomainKind::LogicGrid: return {0, kLogicGridValues - 1};
    case DomainKind::Scheduling:
      return cell % 2 == 0 ? std::pair{1, slot_count} : std::pair{1, max_duration};
    case DomainKind::Seating: return {1, seat_count()};
  }
  return {0, 0};
}

std::string DomainSchema::cell_label(int cell) const {
  switch (kind) {
    case DomainKind::LogicGrid:
      return entities[cell / kLogicGridCategories] + "." +
             categories[cell % kLogicGridCategories].name;
    case DomainKind::Scheduling:
      return entities[cell / 2] + (cell % 2 == 0 ? ".start" : ".duration");
    case DomainKind::Seating: return entities[cell];
  }
  return {};
}

void validate_schema(const DomainSchema& s) {
  require_unique(s.entities, "entity");
  switch (s.kind) {
    case DomainKind::LogicGrid: {
      if (s.entity_count() != kLogicGridEntities) {
        throw ValidationError("logic_grid needs exactly 4 entities");
      }
      if (static_cast<int>(s.categories.size()) != kLogicGridCategories) {
        throw ValidationError("logic_grid needs exactly 3 categories");
      }
      std::vector<std::string> names;
      for (const auto& c : s.categories) {
        if (static_cast<int>(c.values.size()) != kLogicGridValues) {
          throw ValidationError("category '" + c.name + "' needs exactly 4 values");
        }
        require_unique(c.values, "value");
        names.push_back(c.name);
      }
      require_unique(names, "category");
      break;
    }
    case DomainKind::Scheduling:
      if (s.entity_count() < 5 || s.entity_count() > 7) {
        throw ValidationError("scheduling needs 5 to 7 events");
      }
      if (s.slot_count < 1 || s.max_duration < 1 || s.max_duration > s.slot_count) {
        throw ValidationError("scheduling slot range is malformed");
      }
      break;
    case DomainKind::Seating:
      if (s.entity_count() < 6 || s.entity_count() > 8) {
        throw ValidationError("seating needs 6 to 8 participants");
      }
      if (s.table == TableShape::Rectangular && s.seat_count() % 2 != 0) {
        throw ValidationError("rectangular tables need an even seat count");
      }
      break;
  }
}

DomainSchema make_logic_grid(std::vector<std::string> entities, std::vector<Category> categories) {
  DomainSchema s;
  s.kind = DomainKind::LogicGrid;
  s.entities = std::move(entities);
  s.categories = std::move(categories);
  validate_schema(s);
  return s;
}

DomainSchema make_scheduling(std::vector<std::string> events, int slot_count, int max_duration) {
  DomainSchema s;
  s.kind = DomainKind::Scheduling;
  s.entities = std::move(events);
  s.slot_count = slot_count;
  s.max_duration = max_duration;
  validate_schema(s);
  return s;
}

DomainSchema make_seating(std::vector<std::string> people, TableShape table) {
  DomainSchema s;
  s.kind = DomainKind::Seating;
  s.entities = std::move(people);
  s.table = table;
  validate_schema(s);
  return s;
}

std::string describe_context(const DomainSchema& s) {
  std::string out;
  switch (s.kind) {
    case DomainKind::LogicGrid: {
      out = "Each person has exactly one value per category and no two people share a value. Categories: ";
      for (std::size_t c = 0; c < s.categories.size(); ++c) {
        if (c) out += "; ";
        out += s.categories[c].name + " (";
        for (std::size_t v = 0; v < s.categories[c].values.size(); ++v) {
          if (v) out += " < ";
          out += s.categories[c].values[v];
        }
        out += ")";
      }
      out += ".";
      break;
    }
    case DomainKind::Scheduling:
      out = "Time slots 1-" + std::to_string(s.slot_count) + "; each event has a start slot and a duration of 1-" +
            std::to_string(s.max_duration) + " slots (default 1).";
      break;
    case DomainKind::Seating:
      out = std::string(s.table == TableShape::Round ? "Round" : "Rectangular") + " table with seats 1-" +
            std::to_string(s.seat_count()) + "; each person takes exactly one seat.";
      break;
  }
  return out;
}

nlohmann::ordered_json schema_to_json(const DomainSchema& s) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(s.kind));
  j["entities"] = s.entities;
  switch (s.kind) {
    case DomainKind::LogicGrid: {
      auto cats = nlohmann::ordered_json::array();
      for (const auto& c : s.categories) {
        cats.push_back({{"name", c.name}, {"values", c.values}});
      }
      j["categories"] = std::move(cats);
      break;
    }
    case DomainKind::Scheduling:
      j["slots"] = s.slot_count;
      j["max_duration"] = s.max_duration;
      break;
    case DomainKind::Seating:
      j["seats"] = s.seat_count();
      j["table"] = std::string(to_string(s.table));
      break;
  }
  return j;
}

DomainSchema schema_from_json(const nlohmann::json& j) {
  try {
    DomainSchema s;
    s.kind = domain_from_string(j.at("kind").get<std::string>());
    s.entities = j.at("entities").get<std::vector<std::string>>();
    if (s.kind == DomainKind::LogicGrid) {
      for (const auto& c : j.at("categories")) {
        s.categories.push_back({c.at("name").get<std::string>(), c.at("values").get<std::vector<std::string>>()});
      }
    } else if (s.kind == DomainKind::Scheduling) {
      s.slot_count = j.value("slots", kDefaultSlotCount);
      s.max_duration = j.value("max_duration", kDefaultMaxDuration);
    } else {
      s.table = table_from_string(j.value("table", std::string("round")));
      if (j.contains("seats") && j.at("seats").get<int>() != s.seat_count()) {
        throw ValidationError("seat count must equal participant count");
      }
    }
    validate_schema(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed schema json: ") + e.what());
  }
}

namespace seating {

namespace {
int row_of(const DomainSchema& s, int seat) { return (seat - 1) / (s.seat_count() / 2); }
}  // namespace

bool adjacent(const DomainSchema& s, int a, int b) {
  const int p = s.seat_count();
  const int d = std::abs(a - b);
  if (s.table == TableShape::Round) return d == 1 || d == p - 1;
  return d == 1 && row_of(s, a) == row_of(s, b);
}

int distance(const DomainSchema& s, int a, int b) {
  const int d = std::abs(a - b);
  if (s.table == TableShape::Round) return std::min(d, s.seat_count() - d);
  return d;
}

int max_distance(const DomainSchema& s) {
  return s.table == TableShape::Round ? s.seat_count() / 2 : s.seat_count() - 1;
}

bool opposite(const DomainSchema& s, int a, int b) {
  const int p = s.seat_count();
  return p % 2 == 0 && std::abs(a - b) == p / 2;
}

bool left_of(const DomainSchema& s, int a, int b) {
  if (s.table == TableShape::Round) return b == a % s.seat_count() + 1;
  return b == a + 1 && row_of(s, a) == row_of(s, b);
}

}  // namespace seating

}  // namespace driftbench
