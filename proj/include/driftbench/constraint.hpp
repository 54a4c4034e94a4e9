#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftbench/domain.hpp"

namespace driftbench {

struct Assignment;

// 4 logic-grid, 6 scheduling and 7 seating variants.
enum class ConstraintType : std::uint8_t {
  EqValue,
  NeqValue,
  NeqAttr,
  LtAttr,
  AtSlot,
  NotAtSlot,
  SameSlot,
  NotSimultaneous,
  DurationEq,
  StartBetween,
  AtPosition,
  NotAtPosition,
  Adjacent,
  NotAdjacent,
  MinSeparation,
  Opposite,
  LeftOf,
};

inline constexpr int kConstraintTypeCount = 17;

std::string_view type_name(ConstraintType type);
std::optional<ConstraintType> type_from_name(std::string_view name);
DomainKind domain_of(ConstraintType type);
bool is_symmetric(ConstraintType type);
std::span<const ConstraintType> vocabulary(DomainKind kind);

enum class ArgKind { Entity, Category, Value, Integer };
std::span<const ArgKind> signature(ConstraintType type);

using Arg = std::variant<std::string, int>;

/// A typed constraint atom plus the turn that introduced it.
struct Constraint {
  ConstraintType type = ConstraintType::EqValue;
  std::vector<Arg> args;
  int source_turn = 1;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// Builds a constraint; symmetric variants get their two entity arguments
/// sorted case-insensitively.
Constraint make_constraint(ConstraintType type, std::vector<Arg> args, int source_turn = 1);

/// Normalized text form `variant(arg1,arg2,...)`, lowercase. Constraints with
/// the same satisfying-assignment set share a key; all tautologies map to
/// `true()`.
struct CanonicalKey {
  std::string text;

  friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;
  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

inline constexpr std::string_view kTautologyKey = "true()";

/// A constraint with names resolved to schema indices.
struct BoundConstraint {
  ConstraintType type = ConstraintType::EqValue;
  int a = -1;         // first entity
  int b = -1;         // second entity
  int category = -1;  // logic_grid
  int value = -1;     // logic_grid value index
  int n1 = 0;         // slot / seat / duration / k / lo
  int n2 = 0;         // hi

  /// Cells whose values decide the constraint (one or two).
  std::vector<int> cells(const DomainSchema& s) const;
};

/// Throws ValidationError naming the offending argument.
BoundConstraint bind(const Constraint& c, const DomainSchema& s);
void validate_constraint(const Constraint& c, const DomainSchema& s);

CanonicalKey canonicalize(const Constraint& c, const DomainSchema& s);
bool is_tautology(const Constraint& c, const DomainSchema& s);

/// Truth of a bound constraint over raw cell values (every touched cell set).
bool holds(const BoundConstraint& c, const DomainSchema& s, std::span<const int> cells);

/// Throws ContractError when a touched cell is unassigned.
bool evaluate(const Constraint& c, const Assignment& a, const DomainSchema& s);

std::string arg_to_string(const Arg& arg);
/// `type(arg1,arg2,...)` keeping the stored spelling.
std::string to_display(const Constraint& c);

nlohmann::ordered_json constraint_to_json(const Constraint& c);
/// Throws ValidationError on unknown types or malformed args.
Constraint constraint_from_json(const nlohmann::json& j);

/// A constraint that cannot hold together with `c`, or nullopt for
/// tautologies. Used to inject contradictions and to force violations.
std::optional<Constraint> contradicting_constraint(const Constraint& c, const DomainSchema& s);

}  // namespace driftbench

template <>
struct std::hash<driftbench::CanonicalKey> {
  std::size_t operator()(const driftbench::CanonicalKey& k) const noexcept {
    return std::hash<std::string>{}(k.text);
  }
};
