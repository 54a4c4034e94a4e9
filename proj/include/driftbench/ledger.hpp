#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "driftbench/constraint.hpp"

namespace driftbench {

inline constexpr int kDefaultLedgerBudgetTokens = 3000;

/// Committed constraint state across turns. Immutable value: merge returns a
/// new ledger and leaves the receiver untouched.
class Ledger {
 public:
  struct Entry {
    Constraint constraint;
    CanonicalKey key;
    int source_turn = 0;
  };

  explicit Ledger(DomainSchema schema);

  /// Adds the constraints whose canonical key is new (against the ledger and
  /// earlier members of `incoming`). Inserted constraints are stamped with
  /// `turn`. Throws ValidationError before touching anything if one of them
  /// does not fit the schema, ContractError if `turn` goes backwards.
  Ledger merge(std::span<const Constraint> incoming, int turn) const;

  /// One `[turn t] <key>` line per entry, oldest first. When ceil(chars/4)
  /// exceeds the budget the oldest entries collapse into a single
  /// `[... N earlier constraints elided]` line.
  std::string serialize(int budget_tokens = kDefaultLedgerBudgetTokens) const;

  std::vector<Constraint> active_constraints() const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const CanonicalKey& key) const { return keys_.count(key) != 0; }
  int last_turn() const { return entries_.empty() ? 0 : entries_.back().source_turn; }
  const DomainSchema& schema() const { return *schema_; }

  nlohmann::ordered_json to_json() const;

 private:
  std::shared_ptr<const DomainSchema> schema_;
  std::vector<Entry> entries_;
  std::unordered_set<CanonicalKey> keys_;
};

/// Estimated prompt tokens for a piece of text: ceil(chars / 4).
std::size_t estimate_tokens(std::string_view text);

}  // namespace driftbench
