#include "driftbench/constraint.hpp"

#include <algorithm>
#include <array>

#include "driftbench/assignment.hpp"
#include "driftbench/errors.hpp"

namespace driftbench {

namespace {

struct TypeInfo {
  ConstraintType type;
  std::string_view name;
  DomainKind domain;
  bool symmetric;
  std::vector<ArgKind> signature;
};

using AK = ArgKind;

const std::vector<TypeInfo>& type_table() {
  static const std::vector<TypeInfo> table = {
      {ConstraintType::EqValue, "eq_value", DomainKind::LogicGrid, false, {AK::Entity, AK::Category, AK::Value}},
      {ConstraintType::NeqValue, "neq_value", DomainKind::LogicGrid, false, {AK::Entity, AK::Category, AK::Value}},
      {ConstraintType::NeqAttr, "neq_attr", DomainKind::LogicGrid, true, {AK::Entity, AK::Entity, AK::Category}},
      {ConstraintType::LtAttr, "lt_attr", DomainKind::LogicGrid, false, {AK::Entity, AK::Entity, AK::Category}},
      {ConstraintType::AtSlot, "at_slot", DomainKind::Scheduling, false, {AK::Entity, AK::Integer}},
      {ConstraintType::NotAtSlot, "not_at_slot", DomainKind::Scheduling, false, {AK::Entity, AK::Integer}},
      {ConstraintType::SameSlot, "same_slot", DomainKind::Scheduling, true, {AK::Entity, AK::Entity}},
      {ConstraintType::NotSimultaneous, "not_simultaneous", DomainKind::Scheduling, true, {AK::Entity, AK::Entity}},
      {ConstraintType::DurationEq, "duration_eq", DomainKind::Scheduling, false, {AK::Entity, AK::Integer}},
      {ConstraintType::StartBetween, "start_between", DomainKind::Scheduling, false,
       {AK::Entity, AK::Integer, AK::Integer}},
      {ConstraintType::AtPosition, "at_position", DomainKind::Seating, false, {AK::Entity, AK::Integer}},
      {ConstraintType::NotAtPosition, "not_at_position", DomainKind::Seating, false, {AK::Entity, AK::Integer}},
      {ConstraintType::Adjacent, "adjacent", DomainKind::Seating, true, {AK::Entity, AK::Entity}},
      {ConstraintType::NotAdjacent, "not_adjacent", DomainKind::Seating, true, {AK::Entity, AK::Entity}},
      {ConstraintType::MinSeparation, "min_separation", DomainKind::Seating, true,
       {AK::Entity, AK::Entity, AK::Integer}},
      {ConstraintType::Opposite, "opposite", DomainKind::Seating, true, {AK::Entity, AK::Entity}},
      {ConstraintType::LeftOf, "left_of", DomainKind::Seating, false, {AK::Entity, AK::Entity}},
  };
  return table;
}

const TypeInfo& info(ConstraintType type) { return type_table()[static_cast<std::size_t>(type)]; }

const std::array<ConstraintType, 4> kLogicVocab = {ConstraintType::EqValue, ConstraintType::NeqValue,
                                                   ConstraintType::NeqAttr, ConstraintType::LtAttr};
const std::array<ConstraintType, 6> kSchedVocab = {ConstraintType::AtSlot,     ConstraintType::NotAtSlot,
                                                   ConstraintType::SameSlot,   ConstraintType::NotSimultaneous,
                                                   ConstraintType::DurationEq, ConstraintType::StartBetween};
const std::array<ConstraintType, 7> kSeatVocab = {ConstraintType::AtPosition,    ConstraintType::NotAtPosition,
                                                  ConstraintType::Adjacent,      ConstraintType::NotAdjacent,
                                                  ConstraintType::MinSeparation, ConstraintType::Opposite,
                                                  ConstraintType::LeftOf};

bool two_entities(ConstraintType t) {
  const auto& sig = info(t).signature;
  return sig.size() >= 2 && sig[1] == ArgKind::Entity;
}

[[noreturn]] void bad_arg(const Constraint& c, std::size_t index, const std::string& why) {
  throw ValidationError(std::string(type_name(c.type)) + " argument " + std::to_string(index + 1) + " (" +
                        (index < c.args.size() ? arg_to_string(c.args[index]) : std::string("<missing>")) +
                        "): " + why);
}

}  // namespace

std::string_view type_name(ConstraintType type) { return info(type).name; }

std::optional<ConstraintType> type_from_name(std::string_view name) {
  const std::string lower = to_lower(name);
  for (const auto& t : type_table()) {
    if (t.name == lower) return t.type;
  }
  return std::nullopt;
}

DomainKind domain_of(ConstraintType type) { return info(type).domain; }
bool is_symmetric(ConstraintType type) { return info(type).symmetric; }
std::span<const ArgKind> signature(ConstraintType type) { return info(type).signature; }

std::span<const ConstraintType> vocabulary(DomainKind kind) {
  switch (kind) {
    case DomainKind::LogicGrid: return kLogicVocab;
    case DomainKind::Scheduling: return kSchedVocab;
    case DomainKind::Seating: return kSeatVocab;
  }
  return {};
}

std::string arg_to_string(const Arg& arg) {
  if (const auto* s = std::get_if<std::string>(&arg)) return *s;
  return std::to_string(std::get<int>(arg));
}

Constraint make_constraint(ConstraintType type, std::vector<Arg> args, int source_turn) {
  Constraint c{type, std::move(args), source_turn};
  if (is_symmetric(type) && c.args.size() >= 2) {
    const auto* x = std::get_if<std::string>(&c.args[0]);
    const auto* y = std::get_if<std::string>(&c.args[1]);
    if (x && y && to_lower(*y) < to_lower(*x)) std::swap(c.args[0], c.args[1]);
  }
  return c;
}

std::vector<int> BoundConstraint::cells(const DomainSchema& s) const {
  switch (type) {
    case ConstraintType::EqValue:
    case ConstraintType::NeqValue: return {s.grid_cell(a, category)};
    case ConstraintType::NeqAttr:
    case ConstraintType::LtAttr: return {s.grid_cell(a, category), s.grid_cell(b, category)};
    case ConstraintType::AtSlot:
    case ConstraintType::NotAtSlot:
    case ConstraintType::StartBetween: return {s.start_cell(a)};
    case ConstraintType::DurationEq: return {s.duration_cell(a)};
    case ConstraintType::SameSlot:
    case ConstraintType::NotSimultaneous: return {s.start_cell(a), s.start_cell(b)};
    case ConstraintType::AtPosition:
    case ConstraintType::NotAtPosition: return {s.seat_cell(a)};
    default: return {s.seat_cell(a), s.seat_cell(b)};
  }
}

BoundConstraint bind(const Constraint& c, const DomainSchema& s) {
  const auto& sig = signature(c.type);
  if (domain_of(c.type) != s.kind) {
    throw ValidationError(std::string(type_name(c.type)) + " does not belong to the " +
                          std::string(to_string(s.kind)) + " domain");
  }
  if (c.args.size() != sig.size()) {
    throw ValidationError(std::string(type_name(c.type)) + " takes " + std::to_string(sig.size()) +
                          " arguments, got " + std::to_string(c.args.size()));
  }
  BoundConstraint b;
  b.type = c.type;
  int entity_slot = 0;
  int int_slot = 0;
  std::size_t value_arg = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (sig[i] == ArgKind::Integer) {
      const int* n = std::get_if<int>(&c.args[i]);
      if (!n) bad_arg(c, i, "expected an integer");
      (int_slot++ == 0 ? b.n1 : b.n2) = *n;
      continue;
    }
    const std::string* text = std::get_if<std::string>(&c.args[i]);
    if (!text) bad_arg(c, i, "expected a name");
    switch (sig[i]) {
      case ArgKind::Entity: {
        auto idx = s.entity_index(*text);
        if (!idx) bad_arg(c, i, "unknown entity");
        (entity_slot++ == 0 ? b.a : b.b) = *idx;
        break;
      }
      case ArgKind::Category: {
        auto idx = s.category_index(*text);
        if (!idx) bad_arg(c, i, "unknown category");
        b.category = *idx;
        break;
      }
      case ArgKind::Value: value_arg = i; break;
      case ArgKind::Integer: break;
    }
  }
  if (value_arg) {
    auto idx = s.value_index(b.category, std::get<std::string>(c.args[value_arg]));
    if (!idx) bad_arg(c, value_arg, "not a value of that category");
    b.value = *idx;
  }
  if (two_entities(c.type) && b.a == b.b) bad_arg(c, 1, "must differ from the first entity");

  auto in_range = [&](int v, int lo, int hi, std::size_t idx, const char* what) {
    if (v < lo || v > hi) {
      bad_arg(c, idx, std::string(what) + " outside " + std::to_string(lo) + ".." + std::to_string(hi));
    }
  };
  switch (c.type) {
    case ConstraintType::AtSlot:
    case ConstraintType::NotAtSlot: in_range(b.n1, 1, s.slot_count, 1, "slot"); break;
    case ConstraintType::DurationEq: in_range(b.n1, 1, s.max_duration, 1, "duration"); break;
    case ConstraintType::StartBetween:
      in_range(b.n1, 1, s.slot_count, 1, "slot");
      in_range(b.n2, b.n1, s.slot_count, 2, "slot");
      break;
    case ConstraintType::AtPosition:
    case ConstraintType::NotAtPosition: in_range(b.n1, 1, s.seat_count(), 1, "seat"); break;
    case ConstraintType::MinSeparation: in_range(b.n1, 1, seating::max_distance(s), 2, "separation"); break;
    case ConstraintType::Opposite:
      if (s.seat_count() % 2 != 0) bad_arg(c, 1, "opposite needs an even seat count");
      break;
    default: break;
  }
  return b;
}

void validate_constraint(const Constraint& c, const DomainSchema& s) { (void)bind(c, s); }

bool holds(const BoundConstraint& c, const DomainSchema& s, std::span<const int> cells) {
  switch (c.type) {
    case ConstraintType::EqValue: return cells[s.grid_cell(c.a, c.category)] == c.value;
    case ConstraintType::NeqValue: return cells[s.grid_cell(c.a, c.category)] != c.value;
    case ConstraintType::NeqAttr:
      return cells[s.grid_cell(c.a, c.category)] != cells[s.grid_cell(c.b, c.category)];
    case ConstraintType::LtAttr:
      return cells[s.grid_cell(c.a, c.category)] < cells[s.grid_cell(c.b, c.category)];
    case ConstraintType::AtSlot: return cells[s.start_cell(c.a)] == c.n1;
    case ConstraintType::NotAtSlot: return cells[s.start_cell(c.a)] != c.n1;
    case ConstraintType::SameSlot: return cells[s.start_cell(c.a)] == cells[s.start_cell(c.b)];
    case ConstraintType::NotSimultaneous: return cells[s.start_cell(c.a)] != cells[s.start_cell(c.b)];
    case ConstraintType::DurationEq: return cells[s.duration_cell(c.a)] == c.n1;
    case ConstraintType::StartBetween: {
      const int start = cells[s.start_cell(c.a)];
      return start >= c.n1 && start <= c.n2;
    }
    case ConstraintType::AtPosition: return cells[s.seat_cell(c.a)] == c.n1;
    case ConstraintType::NotAtPosition: return cells[s.seat_cell(c.a)] != c.n1;
    case ConstraintType::Adjacent: return seating::adjacent(s, cells[c.a], cells[c.b]);
    case ConstraintType::NotAdjacent: return !seating::adjacent(s, cells[c.a], cells[c.b]);
    case ConstraintType::MinSeparation: return seating::distance(s, cells[c.a], cells[c.b]) >= c.n1;
    case ConstraintType::Opposite: return seating::opposite(s, cells[c.a], cells[c.b]);
    case ConstraintType::LeftOf: return seating::left_of(s, cells[c.a], cells[c.b]);
  }
  return false;
}

bool evaluate(const Constraint& c, const Assignment& a, const DomainSchema& s) {
  const BoundConstraint b = bind(c, s);
  if (a.kind != s.kind || static_cast<int>(a.cells.size()) != s.cell_count()) {
    throw ContractError("assignment does not match schema");
  }
  std::vector<int> values(a.cells.size(), 0);
  for (int cell : b.cells(s)) {
    if (!a.cells[cell]) throw ContractError("assignment is incomplete: " + s.cell_label(cell) + " unset");
    values[cell] = *a.cells[cell];
  }
  return holds(b, s, values);
}

namespace {

// Rewrites a bound constraint into its semantic normal form; nullopt for
// constraints every complete assignment satisfies.
std::optional<BoundConstraint> normal_form(BoundConstraint b, const DomainSchema& s) {
  switch (b.type) {
    case ConstraintType::NeqAttr:
      // values within a category form a bijection
      return std::nullopt;
    case ConstraintType::StartBetween:
      if (b.n1 == b.n2) return BoundConstraint{ConstraintType::AtSlot, b.a, -1, -1, -1, b.n1, 0};
      if (b.n1 == 1 && b.n2 == s.slot_count) return std::nullopt;
      if (b.n1 == 1 && b.n2 == s.slot_count - 1) {
        return BoundConstraint{ConstraintType::NotAtSlot, b.a, -1, -1, -1, s.slot_count, 0};
      }
      if (b.n1 == 2 && b.n2 == s.slot_count) return BoundConstraint{ConstraintType::NotAtSlot, b.a, -1, -1, -1, 1, 0};
      return b;
    case ConstraintType::MinSeparation:
      if (b.n1 <= 1) return std::nullopt;
      if (s.table == TableShape::Round) {
        if (b.n1 == 2) return BoundConstraint{ConstraintType::NotAdjacent, b.a, b.b, -1, -1, 0, 0};
        if (s.seat_count() % 2 == 0 && b.n1 == s.seat_count() / 2) {
          return BoundConstraint{ConstraintType::Opposite, b.a, b.b, -1, -1, 0, 0};
        }
      }
      return b;
    default: return b;
  }
}

}  // namespace

CanonicalKey canonicalize(const Constraint& c, const DomainSchema& s) {
  const auto normal = normal_form(bind(c, s), s);
  if (!normal) return CanonicalKey{std::string(kTautologyKey)};
  const BoundConstraint& b = *normal;
  std::string first = to_lower(s.entities[b.a]);
  std::string second = b.b >= 0 ? to_lower(s.entities[b.b]) : std::string();
  if (is_symmetric(b.type) && second < first) std::swap(first, second);

  std::string key(type_name(b.type));
  key += "(";
  int entity_seen = 0;
  int int_seen = 0;
  const auto& sig = signature(b.type);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) key += ",";
    switch (sig[i]) {
      case ArgKind::Entity: key += entity_seen++ == 0 ? first : second; break;
      case ArgKind::Category: key += to_lower(s.categories[b.category].name); break;
      case ArgKind::Value: key += to_lower(s.categories[b.category].values[b.value]); break;
      case ArgKind::Integer: key += std::to_string(int_seen++ == 0 ? b.n1 : b.n2); break;
    }
  }
  key += ")";
  return CanonicalKey{std::move(key)};
}

bool is_tautology(const Constraint& c, const DomainSchema& s) { return canonicalize(c, s).text == kTautologyKey; }

std::string to_display(const Constraint& c) {
  std::string out(type_name(c.type));
  out += "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) out += (i ? "," : "") + arg_to_string(c.args[i]);
  return out + ")";
}

nlohmann::ordered_json constraint_to_json(const Constraint& c) {
  nlohmann::ordered_json args = nlohmann::ordered_json::array();
  for (const auto& a : c.args) {
    if (const auto* s = std::get_if<std::string>(&a)) {
      args.push_back(*s);
    } else {
      args.push_back(std::get<int>(a));
    }
  }
  return {{"type", std::string(type_name(c.type))}, {"args", std::move(args)}, {"turn", c.source_turn}};
}

Constraint constraint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ValidationError("constraint json needs a string \"type\"");
  }
  const auto type = type_from_name(j.at("type").get<std::string>());
  if (!type) throw ValidationError("unknown constraint type '" + j.at("type").get<std::string>() + "'");
  const auto& sig = signature(*type);
  if (!j.contains("args") || !j.at("args").is_array()) throw ValidationError("constraint json needs \"args\"");
  std::vector<Arg> args;
  for (std::size_t i = 0; i < j.at("args").size(); ++i) {
    const auto& v = j.at("args")[i];
    const bool want_int = i < sig.size() && sig[i] == ArgKind::Integer;
    if (v.is_number_integer()) {
      args.emplace_back(v.get<int>());
    } else if (v.is_string() && want_int) {
      try {
        std::size_t used = 0;
        const int n = std::stoi(v.get<std::string>(), &used);
        if (used != v.get<std::string>().size()) throw std::invalid_argument("trailing");
        args.emplace_back(n);
      } catch (const std::exception&) {
        throw ValidationError("argument " + std::to_string(i + 1) + " of " + std::string(type_name(*type)) +
                              " must be an integer");
      }
    } else if (v.is_string()) {
      args.emplace_back(v.get<std::string>());
    } else {
      throw ValidationError("constraint arguments must be strings or integers");
    }
  }
  int turn = 1;
  if (j.contains("turn") && j.at("turn").is_number_integer()) turn = j.at("turn").get<int>();
  return make_constraint(*type, std::move(args), turn);
}

std::optional<Constraint> contradicting_constraint(const Constraint& c, const DomainSchema& s) {
  if (is_tautology(c, s)) return std::nullopt;
  const BoundConstraint b = bind(c, s);
  const int turn = c.source_turn;
  auto with = [&](ConstraintType t, std::vector<Arg> args) { return make_constraint(t, std::move(args), turn); };
  const std::string ea = s.entities[b.a];
  const std::string eb = b.b >= 0 ? s.entities[b.b] : std::string();
  switch (c.type) {
    case ConstraintType::EqValue: return with(ConstraintType::NeqValue, c.args);
    case ConstraintType::NeqValue: return with(ConstraintType::EqValue, c.args);
    case ConstraintType::LtAttr: return with(ConstraintType::LtAttr, {eb, ea, s.categories[b.category].name});
    case ConstraintType::AtSlot: return with(ConstraintType::NotAtSlot, c.args);
    case ConstraintType::NotAtSlot: return with(ConstraintType::AtSlot, c.args);
    case ConstraintType::SameSlot: return with(ConstraintType::NotSimultaneous, c.args);
    case ConstraintType::NotSimultaneous: return with(ConstraintType::SameSlot, c.args);
    case ConstraintType::DurationEq:
      if (s.max_duration < 2) return std::nullopt;
      return with(ConstraintType::DurationEq, {ea, b.n1 == 1 ? 2 : 1});
    case ConstraintType::StartBetween:
      return with(ConstraintType::AtSlot, {ea, b.n1 > 1 ? 1 : b.n2 + 1});
    case ConstraintType::AtPosition: return with(ConstraintType::NotAtPosition, c.args);
    case ConstraintType::NotAtPosition: return with(ConstraintType::AtPosition, c.args);
    case ConstraintType::Adjacent: return with(ConstraintType::NotAdjacent, c.args);
    case ConstraintType::NotAdjacent:
    case ConstraintType::MinSeparation:
    case ConstraintType::Opposite: return with(ConstraintType::Adjacent, {ea, eb});
    case ConstraintType::LeftOf: return with(ConstraintType::LeftOf, {eb, ea});
    case ConstraintType::NeqAttr: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace driftbench
