#pragma once

// Test-side oracles, written from the constraint definitions without going
// through the library's cell layout or evaluator.

#include <functional>
#include <vector>

#include "driftbench/constraint.hpp"
#include "driftbench/domain.hpp"
#include "driftbench/rng.hpp"

namespace testsupport {

using driftbench::Constraint;
using driftbench::DomainKind;
using driftbench::DomainSchema;

DomainSchema grid_schema();                  // the four-person grid from the fixtures
DomainSchema scheduling_schema(int events);  // events 5..7
DomainSchema round_table(int people);
DomainSchema rect_table(int people);
DomainSchema schema_for(DomainKind kind);
/// A random schema of the given domain: entity counts and table shape vary.
DomainSchema random_schema(DomainKind kind, driftbench::Rng& rng);

/// A schema-valid random constraint (may be a tautology).
Constraint random_constraint(const DomainSchema& s, driftbench::Rng& rng);
std::vector<Constraint> random_constraints(const DomainSchema& s, driftbench::Rng& rng, int n);

/// Per-entity state: grid {value index per category}, scheduling {start,
/// duration}, seating {seat}.
using EntityState = std::vector<int>;
using World = std::vector<EntityState>;  // indexed by entity

bool oracle_holds(const Constraint& c, const DomainSchema& s, const World& w);

/// Every valid state of `entities` (other entities left empty) such that the
/// partial world extends to a complete valid assignment.
void enumerate_partial(const DomainSchema& s, const std::vector<int>& entities,
                       const std::function<void(const World&)>& fn);

/// Entity indices a constraint names, sorted and unique.
std::vector<int> touched_entities(const Constraint& c, const DomainSchema& s);

/// A semantic fingerprint: the entities the constraint really depends on and
/// its truth table over their joint states. Equal fingerprints iff the two
/// constraints admit the same satisfying assignments.
struct Semantics {
  std::vector<int> essential;
  std::vector<bool> table;
  friend bool operator==(const Semantics&, const Semantics&) = default;
  friend auto operator<=>(const Semantics&, const Semantics&) = default;
};
Semantics semantics_of(const Constraint& c, const DomainSchema& s);

/// Full-space brute force over the natural representation; grid and seating only.
bool oracle_sat(const DomainSchema& s, const std::vector<Constraint>& cs);

}  // namespace testsupport
