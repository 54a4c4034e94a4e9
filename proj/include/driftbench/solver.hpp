#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftbench/assignment.hpp"
#include "driftbench/constraint.hpp"

namespace driftbench {

struct SatResult {
  bool sat = false;
  std::optional<Assignment> witness;
};

struct MusResult {
  std::vector<Constraint> subset;  // input order preserved
};

/// The constraint set the semantics actually applies: `constraints` plus an
/// implicit duration_eq(e, 1) (source_turn 0) for every scheduling event that
/// has no explicit duration constraint.
std::vector<Constraint> effective_constraints(const DomainSchema& s, std::span<const Constraint> constraints);

/// Backtracking search with forward checking. Variables follow schema entity
/// order, values ascending, so the witness is deterministic for a fixed input.
SatResult check_sat(const DomainSchema& s, std::span<const Constraint> constraints);

/// Exhaustive enumeration; refuses (OracleRefusal) above 10^7 candidates.
SatResult brute_force_sat(const DomainSchema& s, std::span<const Constraint> constraints);
inline constexpr double kBruteForceLimit = 1e7;

/// Phi(a): eq_value atoms (logic grid), at_slot + duration_eq (scheduling),
/// at_position (seating).
std::vector<Constraint> assignment_to_constraints(const Assignment& a, const DomainSchema& s);

/// Whether complete assignment `a` satisfies every constraint in effective(S).
bool satisfies(const Assignment& a, std::span<const Constraint> constraints, const DomainSchema& s);

/// Deletion-based MUS: walk the input in order, drop a constraint whenever
/// the remainder stays unsatisfiable. Throws ContractError on SAT input.
MusResult extract_mus(const DomainSchema& s, std::span<const Constraint> constraints);

/// Members of effective(L) the assignment breaks.
std::vector<Constraint> violated_constraints(const Assignment& a, std::span<const Constraint> ledger,
                                             const DomainSchema& s);

}  // namespace driftbench
