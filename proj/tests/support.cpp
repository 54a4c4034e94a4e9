#include "support.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

namespace testsupport {

using namespace driftbench;

namespace {

const std::vector<std::string> kPeople = {"Avery", "Blake", "Casey", "Drew", "Emery", "Finley", "Gray", "Harper"};
const std::vector<std::string> kEvents = {"Sync", "Testing", "Meeting", "QA", "Planning", "Design", "Review"};

int entity(const DomainSchema& s, const Arg& a) { return *s.entity_index(std::get<std::string>(a)); }
int integer(const Arg& a) { return std::get<int>(a); }

bool round_adjacent(int p, int a, int b) {
  const int d = std::abs(a - b);
  return d == 1 || d == p - 1;
}

// Rectangular: seats 1..P/2 form the first row, P/2+1..P the second.
int row(int p, int seat) { return seat <= p / 2 ? 0 : 1; }

bool adjacent(const DomainSchema& s, int a, int b) {
  const int p = s.entity_count();
  if (s.table == TableShape::Round) return round_adjacent(p, a, b);
  return std::abs(a - b) == 1 && row(p, a) == row(p, b);
}

int separation(const DomainSchema& s, int a, int b) {
  const int d = std::abs(a - b);
  return s.table == TableShape::Round ? std::min(d, s.entity_count() - d) : d;
}

bool directly_left(const DomainSchema& s, int a, int b) {
  const int p = s.entity_count();
  if (s.table == TableShape::Round) return b == (a == p ? 1 : a + 1);
  return b == a + 1 && row(p, a) == row(p, b);
}

// Valid per-entity states ignoring cross-entity constraints.
std::vector<EntityState> states_of(const DomainSchema& s) {
  std::vector<EntityState> out;
  switch (s.kind) {
    case DomainKind::LogicGrid:
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c) out.push_back({a, b, c});
      break;
    case DomainKind::Scheduling:
      for (int start = 1; start <= s.slot_count; ++start)
        for (int d = 1; d <= s.max_duration && start + d - 1 <= s.slot_count; ++d) out.push_back({start, d});
      break;
    case DomainKind::Seating:
      for (int seat = 1; seat <= s.entity_count(); ++seat) out.push_back({seat});
      break;
  }
  return out;
}

bool compatible(const DomainSchema& s, const EntityState& x, const EntityState& y) {
  switch (s.kind) {
    case DomainKind::LogicGrid:
      for (int c = 0; c < 3; ++c)
        if (x[c] == y[c]) return false;
      return true;
    case DomainKind::Scheduling: return true;
    case DomainKind::Seating: return x[0] != y[0];
  }
  return true;
}

}  // namespace

DomainSchema grid_schema() {
  return make_logic_grid({"Blake", "Drew", "Avery", "Finley"},
                         {{"color", {"Red", "Blue", "Green", "Yellow"}},
                          {"pet", {"Cat", "Dog", "Bird", "Fish"}},
                          {"profession", {"Doctor", "Artist", "Teacher", "Chef"}}});
}

DomainSchema scheduling_schema(int events) {
  return make_scheduling(std::vector<std::string>(kEvents.begin(), kEvents.begin() + events));
}

DomainSchema round_table(int people) {
  return make_seating(std::vector<std::string>(kPeople.begin(), kPeople.begin() + people), TableShape::Round);
}

DomainSchema rect_table(int people) {
  return make_seating(std::vector<std::string>(kPeople.begin(), kPeople.begin() + people), TableShape::Rectangular);
}

DomainSchema schema_for(DomainKind kind) {
  switch (kind) {
    case DomainKind::LogicGrid: return grid_schema();
    case DomainKind::Scheduling: return scheduling_schema(6);
    case DomainKind::Seating: return round_table(7);
  }
  return grid_schema();
}

DomainSchema random_schema(DomainKind kind, Rng& rng) {
  switch (kind) {
    case DomainKind::LogicGrid: {
      std::vector<Category> cats = {{"color", {"Red", "Blue", "Green", "Yellow"}},
                                    {"pet", {"Cat", "Dog", "Bird", "Fish"}},
                                    {"drink", {"Tea", "Coffee", "Milk", "Juice"}},
                                    {"city", {"Oslo", "Lima", "Rome", "Cairo"}}};
      rng.shuffle(cats);
      cats.resize(3);
      std::vector<std::string> people = kPeople;
      rng.shuffle(people);
      people.resize(4);
      return make_logic_grid(people, cats);
    }
    case DomainKind::Scheduling: return scheduling_schema(rng.uniform_int(5, 7));
    case DomainKind::Seating: {
      const int p = rng.uniform_int(6, 8);
      if (p % 2 == 0 && rng.bernoulli(0.5)) return rect_table(p);
      return round_table(p);
    }
  }
  return grid_schema();
}

Constraint random_constraint(const DomainSchema& s, Rng& rng) {
  const auto vocab = vocabulary(s.kind);
  const int n = s.entity_count();
  for (;;) {
    const ConstraintType t = vocab[rng.index(vocab.size())];
    const int a = rng.uniform_int(0, n - 1);
    int b = rng.uniform_int(0, n - 2);
    if (b >= a) ++b;
    const std::string ea = s.entities[a], eb = s.entities[b];
    std::vector<Arg> args;
    switch (t) {
      case ConstraintType::EqValue:
      case ConstraintType::NeqValue: {
        const auto& cat = s.categories[rng.index(3)];
        args = {ea, cat.name, cat.values[rng.index(4)]};
        break;
      }
      case ConstraintType::NeqAttr:
      case ConstraintType::LtAttr: args = {ea, eb, s.categories[rng.index(3)].name}; break;
      case ConstraintType::AtSlot:
      case ConstraintType::NotAtSlot: args = {ea, rng.uniform_int(1, s.slot_count)}; break;
      case ConstraintType::SameSlot:
      case ConstraintType::NotSimultaneous:
      case ConstraintType::Adjacent:
      case ConstraintType::NotAdjacent:
      case ConstraintType::LeftOf: args = {ea, eb}; break;
      case ConstraintType::DurationEq: args = {ea, rng.uniform_int(1, s.max_duration)}; break;
      case ConstraintType::StartBetween: {
        const int lo = rng.uniform_int(1, s.slot_count);
        args = {ea, lo, rng.uniform_int(lo, s.slot_count)};
        break;
      }
      case ConstraintType::AtPosition:
      case ConstraintType::NotAtPosition: args = {ea, rng.uniform_int(1, n)}; break;
      case ConstraintType::MinSeparation: {
        const int max_sep = s.table == TableShape::Round ? n / 2 : n - 1;
        args = {ea, eb, rng.uniform_int(1, max_sep)};
        break;
      }
      case ConstraintType::Opposite:
        if (n % 2 != 0) continue;
        args = {ea, eb};
        break;
    }
    return make_constraint(t, std::move(args));
  }
}

std::vector<Constraint> random_constraints(const DomainSchema& s, Rng& rng, int n) {
  std::vector<Constraint> out;
  for (int i = 0; i < n; ++i) out.push_back(random_constraint(s, rng));
  return out;
}

bool oracle_holds(const Constraint& c, const DomainSchema& s, const World& w) {
  const auto& x = c.args;
  switch (c.type) {
    case ConstraintType::EqValue:
    case ConstraintType::NeqValue: {
      const int cat = *s.category_index(std::get<std::string>(x[1]));
      const int val = *s.value_index(cat, std::get<std::string>(x[2]));
      const bool eq = w[entity(s, x[0])][cat] == val;
      return c.type == ConstraintType::EqValue ? eq : !eq;
    }
    case ConstraintType::NeqAttr:
    case ConstraintType::LtAttr: {
      const int cat = *s.category_index(std::get<std::string>(x[2]));
      const int va = w[entity(s, x[0])][cat], vb = w[entity(s, x[1])][cat];
      return c.type == ConstraintType::NeqAttr ? va != vb : va < vb;
    }
    case ConstraintType::AtSlot: return w[entity(s, x[0])][0] == integer(x[1]);
    case ConstraintType::NotAtSlot: return w[entity(s, x[0])][0] != integer(x[1]);
    case ConstraintType::SameSlot: return w[entity(s, x[0])][0] == w[entity(s, x[1])][0];
    case ConstraintType::NotSimultaneous: return w[entity(s, x[0])][0] != w[entity(s, x[1])][0];
    case ConstraintType::DurationEq: return w[entity(s, x[0])][1] == integer(x[1]);
    case ConstraintType::StartBetween: {
      const int start = w[entity(s, x[0])][0];
      return integer(x[1]) <= start && start <= integer(x[2]);
    }
    case ConstraintType::AtPosition: return w[entity(s, x[0])][0] == integer(x[1]);
    case ConstraintType::NotAtPosition: return w[entity(s, x[0])][0] != integer(x[1]);
    case ConstraintType::Adjacent: return adjacent(s, w[entity(s, x[0])][0], w[entity(s, x[1])][0]);
    case ConstraintType::NotAdjacent: return !adjacent(s, w[entity(s, x[0])][0], w[entity(s, x[1])][0]);
    case ConstraintType::MinSeparation:
      return separation(s, w[entity(s, x[0])][0], w[entity(s, x[1])][0]) >= integer(x[2]);
    case ConstraintType::Opposite: {
      const int p = s.entity_count();
      return p % 2 == 0 && std::abs(w[entity(s, x[0])][0] - w[entity(s, x[1])][0]) == p / 2;
    }
    case ConstraintType::LeftOf: return directly_left(s, w[entity(s, x[0])][0], w[entity(s, x[1])][0]);
  }
  return false;
}

void enumerate_partial(const DomainSchema& s, const std::vector<int>& entities,
                       const std::function<void(const World&)>& fn) {
  const auto states = states_of(s);
  World w(s.entity_count());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == entities.size()) {
      fn(w);
      return;
    }
    for (const auto& st : states) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = compatible(s, w[entities[j]], st);
      if (!ok) continue;
      w[entities[i]] = st;
      rec(i + 1);
    }
    w[entities[i]].clear();
  };
  rec(0);
}

std::vector<int> touched_entities(const Constraint& c, const DomainSchema& s) {
  std::set<int> out;
  const auto sig = signature(c.type);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (sig[i] == ArgKind::Entity) out.insert(entity(s, c.args[i]));
  }
  return {out.begin(), out.end()};
}

Semantics semantics_of(const Constraint& c, const DomainSchema& s) {
  const auto touched = touched_entities(c, s);
  // Which touched entities matter: e matters when two worlds that differ only
  // in e disagree.
  std::map<std::vector<EntityState>, bool> truth;
  enumerate_partial(s, touched, [&](const World& w) {
    std::vector<EntityState> key;
    for (int e : touched) key.push_back(w[e]);
    truth[key] = oracle_holds(c, s, w);
  });
  std::vector<int> essential;
  for (std::size_t i = 0; i < touched.size(); ++i) {
    std::map<std::vector<EntityState>, std::set<bool>> by_rest;
    for (const auto& [key, v] : truth) {
      auto rest = key;
      rest.erase(rest.begin() + static_cast<long>(i));
      by_rest[rest].insert(v);
    }
    bool matters = false;
    for (const auto& [rest, vals] : by_rest) matters = matters || vals.size() > 1;
    if (matters) essential.push_back(touched[i]);
  }
  Semantics out{essential, {}};
  if (essential.empty()) {
    out.table.push_back(truth.begin()->second);
    return out;
  }
  enumerate_partial(s, essential, [&](const World& w) {
    World full = w;
    // Fill inessential touched entities with any compatible state; the value
    // does not matter by construction.
    std::vector<int> missing;
    for (int e : touched)
      if (std::find(essential.begin(), essential.end(), e) == essential.end()) missing.push_back(e);
    if (!missing.empty()) {
      bool done = false;
      enumerate_partial(s, touched, [&](const World& cand) {
        if (done) return;
        for (int e : essential)
          if (cand[e] != w[e]) return;
        full = cand;
        done = true;
      });
    }
    out.table.push_back(oracle_holds(c, s, full));
  });
  return out;
}

bool oracle_sat(const DomainSchema& s, const std::vector<Constraint>& cs) {
  std::vector<int> all(s.entity_count());
  std::iota(all.begin(), all.end(), 0);
  bool found = false;
  enumerate_partial(s, all, [&](const World& w) {
    if (found) return;
    found = std::all_of(cs.begin(), cs.end(), [&](const Constraint& c) { return oracle_holds(c, s, w); });
  });
  return found;
}

}  // namespace testsupport
