#include <algorithm>

#include "doctest.h"
#include "driftbench/errors.hpp"
#include "driftbench/solver.hpp"
#include "support.hpp"

using namespace driftbench;
using namespace testsupport;

namespace {

Constraint C(ConstraintType t, std::vector<Arg> args, int turn = 1) { return make_constraint(t, std::move(args), turn); }

bool witness_ok(const DomainSchema& s, const std::vector<Constraint>& cs, const SatResult& r) {
  if (!r.witness) return false;
  if (!schema_validate(*r.witness, s).complete()) return false;
  for (const auto& c : effective_constraints(s, cs)) {
    if (!evaluate(c, *r.witness, s)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("check_sat agrees with brute force and its witnesses hold") {
  Rng rng(2024);
  for (DomainKind kind : kAllDomains) {
    int sat = 0, unsat = 0;
    for (int i = 0; i < 120; ++i) {
      const auto s = random_schema(kind, rng);
      const auto cs = random_constraints(s, rng, rng.uniform_int(1, 15));
      const SatResult fast = check_sat(s, cs);
      const SatResult slow = brute_force_sat(s, cs);
      REQUIRE(fast.sat == slow.sat);
      if (fast.sat) {
        ++sat;
        CHECK(witness_ok(s, cs, fast));
        CHECK(witness_ok(s, cs, slow));
      } else {
        ++unsat;
        CHECK_FALSE(fast.witness.has_value());
      }
    }
    // the generator of random sets should exercise both outcomes
    CHECK(sat > 0);
    CHECK(unsat > 0);
  }
}

TEST_CASE("brute force agrees with the natural-representation oracle") {
  Rng rng(77);
  for (DomainKind kind : {DomainKind::LogicGrid, DomainKind::Seating}) {
    for (int i = 0; i < 40; ++i) {
      const auto s = kind == DomainKind::LogicGrid ? grid_schema() : (i % 2 ? round_table(6) : rect_table(6));
      const auto cs = random_constraints(s, rng, rng.uniform_int(1, 12));
      CHECK(brute_force_sat(s, cs).sat == oracle_sat(s, cs));
    }
  }
}

TEST_CASE("empty constraint set is satisfiable") {
  for (DomainKind kind : kAllDomains) {
    const auto s = schema_for(kind);
    const auto r = check_sat(s, {});
    CHECK(r.sat);
    CHECK(witness_ok(s, {}, r));
  }
}

TEST_CASE("check_sat witness is deterministic") {
  Rng rng(5);
  const auto s = round_table(8);
  const auto cs = random_constraints(s, rng, 4);
  const auto a = check_sat(s, cs);
  const auto b = check_sat(s, cs);
  REQUIRE(a.sat);
  CHECK(*a.witness == *b.witness);
}

TEST_CASE("scheduling durations default to one slot") {
  const auto s = scheduling_schema(5);
  // without a duration constraint an event occupies one slot
  const auto r = check_sat(s, std::vector<Constraint>{C(ConstraintType::AtSlot, {"Sync", 10})});
  REQUIRE(r.sat);
  CHECK(*r.witness->cells[s.duration_cell(0)] == 1);
  // an explicit duration of 3 cannot start at slot 10
  CHECK_FALSE(check_sat(s, std::vector<Constraint>{C(ConstraintType::AtSlot, {"Sync", 10}),
                                                   C(ConstraintType::DurationEq, {"Sync", 3})})
                  .sat);
  const auto eff = effective_constraints(s, std::vector<Constraint>{C(ConstraintType::DurationEq, {"QA", 3})});
  CHECK(eff.size() == 5);
  CHECK(std::count_if(eff.begin(), eff.end(), [](const Constraint& c) { return c.source_turn == 0; }) == 4);
}

TEST_CASE("brute force refuses oversized scheduling spaces") {
  // the standard 10 slots cap seven events at exactly 10^7 candidates
  const auto s = scheduling_schema(7);
  CHECK(brute_force_sat(s, {}).sat);
  const auto wide = make_scheduling(s.entities, 12);
  CHECK_THROWS_AS(brute_force_sat(wide, {}), OracleRefusal);
}

TEST_CASE("Phi(a) pins exactly the assignment") {
  Rng rng(8);
  for (DomainKind kind : kAllDomains) {
    const auto s = schema_for(kind);
    const auto cs = random_constraints(s, rng, 3);
    const auto r = check_sat(s, cs);
    if (!r.sat) continue;
    auto pinned = assignment_to_constraints(*r.witness, s);
    const auto again = check_sat(s, pinned);
    REQUIRE(again.sat);
    CHECK(*again.witness == *r.witness);
    CHECK(satisfies(*r.witness, cs, s));
  }
}

TEST_CASE("MUS is unsatisfiable and minimal") {
  Rng rng(99);
  for (DomainKind kind : kAllDomains) {
    int checked = 0;
    while (checked < 30) {
      const auto s = random_schema(kind, rng);
      const auto cs = random_constraints(s, rng, rng.uniform_int(3, 15));
      if (check_sat(s, cs).sat) continue;
      ++checked;
      const auto mus = extract_mus(s, cs).subset;
      REQUIRE_FALSE(mus.empty());
      CHECK_FALSE(check_sat(s, mus).sat);
      for (std::size_t i = 0; i < mus.size(); ++i) {
        auto less = mus;
        less.erase(less.begin() + static_cast<long>(i));
        CHECK(check_sat(s, less).sat);
      }
      // input order preserved
      std::size_t pos = 0;
      for (const auto& m : mus) {
        while (pos < cs.size() && !(cs[pos] == m)) ++pos;
        CHECK(pos < cs.size());
      }
    }
  }
}

TEST_CASE("MUS on the transcript contradiction") {
  auto s = make_seating({"Diana", "Ruby", "Tina", "Noah", "Charlie", "Frank", "Karen"}, TableShape::Round);
  std::vector<Constraint> ledger = {C(ConstraintType::AtPosition, {"Karen", 3}, 1),
                                    C(ConstraintType::NotAdjacent, {"Karen", "Ruby"}, 1),
                                    C(ConstraintType::AtPosition, {"Diana", 6}, 2),
                                    C(ConstraintType::AtPosition, {"Ruby", 4}, 3)};
  const auto mus = extract_mus(s, ledger).subset;
  REQUIRE(mus.size() == 3);
  CHECK(mus[0] == ledger[0]);
  CHECK(mus[1] == ledger[1]);
  CHECK(mus[2] == ledger[3]);
  CHECK_THROWS_AS(extract_mus(s, std::vector<Constraint>(ledger.begin(), ledger.begin() + 3)), ContractError);
}

TEST_CASE("violated_constraints localizes drift") {
  auto s = make_seating({"Diana", "Ruby", "Tina", "Noah", "Charlie", "Frank", "Karen"}, TableShape::Round);
  std::vector<Constraint> ledger = {C(ConstraintType::AtPosition, {"Karen", 3}), C(ConstraintType::NotAdjacent, {"Charlie", "Frank"}),
                                    C(ConstraintType::AtPosition, {"Diana", 6})};
  const auto a = Assignment::from_cells(s, {6, 1, 5, 2, 7, 3, 4});
  const auto v = violated_constraints(a, ledger, s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == ledger[0]);
  CHECK_FALSE(satisfies(a, ledger, s));
}
