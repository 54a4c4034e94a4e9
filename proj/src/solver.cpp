#include "driftbench/solver.hpp"

#include <bit>
#include <cstdint>
#include <numeric>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {

std::vector<Constraint> effective_constraints(const DomainSchema& s, std::span<const Constraint> constraints) {
  std::vector<Constraint> out(constraints.begin(), constraints.end());
  if (s.kind != DomainKind::Scheduling) return out;
  std::vector<bool> covered(static_cast<std::size_t>(s.entity_count()), false);
  for (const auto& c : constraints) {
    if (c.type == ConstraintType::DurationEq) covered[bind(c, s).a] = true;
  }
  for (int e = 0; e < s.entity_count(); ++e) {
    if (!covered[e]) out.push_back(make_constraint(ConstraintType::DurationEq, {s.entities[e], 1}, 0));
  }
  return out;
}

namespace {

using Mask = std::uint32_t;

// One binary or unary test over cells. `range_event` >= 0 marks the implicit
// "event ends inside the slot range" check for that event.
struct Check {
  int x = -1;
  int y = -1;
  BoundConstraint constraint;
  int range_event = -1;
};

class Search {
 public:
  Search(const DomainSchema& s, std::span<const Constraint> constraints) : schema_(s) {
    const int n = s.cell_count();
    base_.resize(n);
    domains_.resize(n);
    for (int cell = 0; cell < n; ++cell) {
      auto [lo, hi] = s.cell_range(cell);
      base_[cell] = lo;
      domains_[cell] = hi >= lo ? static_cast<Mask>((std::uint64_t{1} << (hi - lo + 1)) - 1) : 0;
    }
    watches_.resize(n);
    group_of_.assign(n, -1);
    values_.assign(n, 0);

    for (const auto& c : effective_constraints(s, constraints)) add(bind(c, s));

    if (s.kind == DomainKind::Scheduling) {
      for (int e = 0; e < s.entity_count(); ++e) {
        Check ch;
        ch.x = s.start_cell(e);
        ch.y = s.duration_cell(e);
        ch.range_event = e;
        push_binary(ch);
      }
    } else if (s.kind == DomainKind::LogicGrid) {
      for (int c = 0; c < kLogicGridCategories; ++c) {
        std::vector<int> group;
        for (int e = 0; e < s.entity_count(); ++e) group.push_back(s.grid_cell(e, c));
        add_group(group);
      }
    } else {
      std::vector<int> group(static_cast<std::size_t>(n));
      std::iota(group.begin(), group.end(), 0);
      add_group(group);
    }
  }

  std::optional<std::vector<int>> solve() {
    if (!node_consistent()) return std::nullopt;
    if (!recurse(domains_, 0)) return std::nullopt;
    return values_;
  }

 private:
  void add(const BoundConstraint& b) {
    const auto cells = b.cells(schema_);
    Check ch;
    ch.constraint = b;
    ch.x = cells[0];
    if (cells.size() == 1) {
      unary_.push_back(ch);
    } else {
      ch.y = cells[1];
      push_binary(ch);
    }
  }

  void push_binary(const Check& ch) {
    binary_.push_back(ch);
    const int idx = static_cast<int>(binary_.size()) - 1;
    watches_[ch.x].push_back(idx);
    watches_[ch.y].push_back(idx);
  }

  void add_group(const std::vector<int>& cells) {
    for (int cell : cells) group_of_[cell] = static_cast<int>(groups_.size());
    groups_.push_back(cells);
  }

  bool test(const Check& ch) const {
    if (ch.range_event >= 0) return values_[ch.x] + values_[ch.y] - 1 <= schema_.slot_count;
    return holds(ch.constraint, schema_, values_);
  }

  bool node_consistent() {
    for (const auto& ch : unary_) {
      Mask kept = 0;
      for (Mask m = domains_[ch.x]; m; m &= m - 1) {
        const int bit = std::countr_zero(m);
        values_[ch.x] = base_[ch.x] + bit;
        if (test(ch)) kept |= Mask{1} << bit;
      }
      domains_[ch.x] = kept;
      if (!kept) return false;
    }
    return true;
  }

  bool recurse(const std::vector<Mask>& domains, int var) {
    if (var == static_cast<int>(domains.size())) return true;
    for (Mask m = domains[var]; m; m &= m - 1) {
      const int bit = std::countr_zero(m);
      values_[var] = base_[var] + bit;
      std::vector<Mask> next = domains;
      next[var] = Mask{1} << bit;
      if (forward_check(next, var, bit) && recurse(next, var + 1)) return true;
    }
    return false;
  }

  // Prunes later (unassigned) variables against the value just given to `var`.
  bool forward_check(std::vector<Mask>& domains, int var, int bit) {
    if (group_of_[var] >= 0) {
      for (int other : groups_[group_of_[var]]) {
        if (other <= var) continue;
        const int other_bit = base_[var] + bit - base_[other];
        if (other_bit >= 0 && other_bit < 32) domains[other] &= ~(Mask{1} << other_bit);
        if (!domains[other]) return false;
      }
    }
    for (int idx : watches_[var]) {
      const Check& ch = binary_[idx];
      const int other = ch.x == var ? ch.y : ch.x;
      if (other < var) continue;
      Mask kept = 0;
      for (Mask m = domains[other]; m; m &= m - 1) {
        const int b = std::countr_zero(m);
        values_[other] = base_[other] + b;
        if (test(ch)) kept |= Mask{1} << b;
      }
      domains[other] = kept;
      if (!kept) return false;
    }
    return true;
  }

  const DomainSchema& schema_;
  std::vector<int> base_;
  std::vector<Mask> domains_;
  std::vector<int> values_;
  std::vector<Check> unary_;
  std::vector<Check> binary_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::vector<int>> groups_;
  std::vector<int> group_of_;
};

}  // namespace

SatResult check_sat(const DomainSchema& s, std::span<const Constraint> constraints) {
  Search search(s, constraints);
  auto cells = search.solve();
  if (!cells) return SatResult{false, std::nullopt};
  return SatResult{true, Assignment::from_cells(s, *cells)};
}

namespace {

bool all_hold(const std::vector<BoundConstraint>& bound, const DomainSchema& s, const std::vector<int>& cells) {
  for (const auto& b : bound) {
    if (!holds(b, s, cells)) return false;
  }
  return true;
}

}  // namespace

SatResult brute_force_sat(const DomainSchema& s, std::span<const Constraint> constraints) {
  const auto effective = effective_constraints(s, constraints);
  std::vector<BoundConstraint> bound;
  bound.reserve(effective.size());
  for (const auto& c : effective) bound.push_back(bind(c, s));

  std::vector<int> cells(static_cast<std::size_t>(s.cell_count()), 0);
  auto found = [&]() { return SatResult{true, Assignment::from_cells(s, cells)}; };

  switch (s.kind) {
    case DomainKind::LogicGrid: {
      // (4!)^3 bijections, one permutation per category
      std::vector<std::vector<int>> perms;
      std::vector<int> p = {0, 1, 2, 3};
      do perms.push_back(p);
      while (std::next_permutation(p.begin(), p.end()));
      for (const auto& p0 : perms) {
        for (const auto& p1 : perms) {
          for (const auto& p2 : perms) {
            for (int e = 0; e < kLogicGridEntities; ++e) {
              cells[s.grid_cell(e, 0)] = p0[e];
              cells[s.grid_cell(e, 1)] = p1[e];
              cells[s.grid_cell(e, 2)] = p2[e];
            }
            if (all_hold(bound, s, cells)) return found();
          }
        }
      }
      return SatResult{false, std::nullopt};
    }
    case DomainKind::Seating: {
      std::vector<int> seats(static_cast<std::size_t>(s.seat_count()));
      std::iota(seats.begin(), seats.end(), 1);
      do {
        cells = seats;
        if (all_hold(bound, s, cells)) return found();
      } while (std::next_permutation(seats.begin(), seats.end()));
      return SatResult{false, std::nullopt};
    }
    case DomainKind::Scheduling: {
      // Per-event (start, duration) candidates: durations are pinned by the
      // duration constraints first, then single-event constraints filter.
      const int events = s.entity_count();
      std::vector<std::vector<std::pair<int, int>>> options(static_cast<std::size_t>(events));
      double space = 1.0;
      for (int e = 0; e < events; ++e) {
        std::vector<const BoundConstraint*> local;
        for (const auto& b : bound) {
          if (b.a == e && b.b < 0) local.push_back(&b);
        }
        for (int d = 1; d <= s.max_duration; ++d) {
          for (int start = 1; start + d - 1 <= s.slot_count; ++start) {
            cells[s.start_cell(e)] = start;
            cells[s.duration_cell(e)] = d;
            bool ok = true;
            for (const auto* b : local) ok = ok && holds(*b, s, cells);
            if (ok) options[e].emplace_back(start, d);
          }
        }
        space *= static_cast<double>(options[e].size());
      }
      if (space == 0.0) return SatResult{false, std::nullopt};
      if (space > kBruteForceLimit) {
        throw OracleRefusal("brute-force space of " + std::to_string(static_cast<long long>(space)) +
                                " candidates exceeds the 10^7 bound",
                            space);
      }
      std::vector<std::size_t> odometer(static_cast<std::size_t>(events), 0);
      while (true) {
        for (int e = 0; e < events; ++e) {
          cells[s.start_cell(e)] = options[e][odometer[e]].first;
          cells[s.duration_cell(e)] = options[e][odometer[e]].second;
        }
        if (all_hold(bound, s, cells)) return found();
        int e = events - 1;
        while (e >= 0 && ++odometer[e] == options[e].size()) odometer[e--] = 0;
        if (e < 0) break;
      }
      return SatResult{false, std::nullopt};
    }
  }
  return SatResult{false, std::nullopt};
}

std::vector<Constraint> assignment_to_constraints(const Assignment& a, const DomainSchema& s) {
  const std::vector<int> v = a.values();
  std::vector<Constraint> out;
  for (int e = 0; e < s.entity_count(); ++e) {
    const std::string& name = s.entities[e];
    switch (s.kind) {
      case DomainKind::LogicGrid:
        for (int c = 0; c < kLogicGridCategories; ++c) {
          const int value = v[s.grid_cell(e, c)];
          if (value < 0 || value >= kLogicGridValues) throw ContractError("value out of range for " + name);
          out.push_back(make_constraint(ConstraintType::EqValue,
                                        {name, s.categories[c].name, s.categories[c].values[value]}));
        }
        break;
      case DomainKind::Scheduling:
        out.push_back(make_constraint(ConstraintType::AtSlot, {name, v[s.start_cell(e)]}));
        out.push_back(make_constraint(ConstraintType::DurationEq, {name, v[s.duration_cell(e)]}));
        break;
      case DomainKind::Seating:
        out.push_back(make_constraint(ConstraintType::AtPosition, {name, v[s.seat_cell(e)]}));
        break;
    }
  }
  return out;
}

bool satisfies(const Assignment& a, std::span<const Constraint> constraints, const DomainSchema& s) {
  if (a.kind != s.kind || static_cast<int>(a.cells.size()) != s.cell_count()) {
    throw ContractError("assignment does not match schema");
  }
  const std::vector<int> cells = a.values();
  for (const auto& c : effective_constraints(s, constraints)) {
    if (!holds(bind(c, s), s, cells)) return false;
  }
  return true;
}

MusResult extract_mus(const DomainSchema& s, std::span<const Constraint> constraints) {
  std::vector<Constraint> working(constraints.begin(), constraints.end());
  if (check_sat(s, working).sat) throw ContractError("extract_mus called on a satisfiable set");
  std::size_t i = 0;
  while (i < working.size()) {
    std::vector<Constraint> trial;
    trial.reserve(working.size() - 1);
    for (std::size_t j = 0; j < working.size(); ++j) {
      if (j != i) trial.push_back(working[j]);
    }
    if (!check_sat(s, trial).sat) {
      working = std::move(trial);
    } else {
      ++i;
    }
  }
  return MusResult{std::move(working)};
}

std::vector<Constraint> violated_constraints(const Assignment& a, std::span<const Constraint> ledger,
                                             const DomainSchema& s) {
  const std::vector<int> cells = a.values();
  std::vector<Constraint> out;
  for (const auto& c : effective_constraints(s, ledger)) {
    if (!holds(bind(c, s), s, cells)) out.push_back(c);
  }
  return out;
}

}  // namespace driftbench
