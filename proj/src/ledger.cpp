#include "driftbench/ledger.hpp"

#include "driftbench/errors.hpp"

namespace driftbench {

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

Ledger::Ledger(DomainSchema schema) : schema_(std::make_shared<const DomainSchema>(std::move(schema))) {}

Ledger Ledger::merge(std::span<const Constraint> incoming, int turn) const {
  if (turn < last_turn()) {
    throw ContractError("merge at turn " + std::to_string(turn) + " after entries from turn " +
                        std::to_string(last_turn()));
  }
  std::vector<CanonicalKey> keys;
  keys.reserve(incoming.size());
  for (const auto& c : incoming) keys.push_back(canonicalize(c, *schema_));

  Ledger out = *this;
  for (std::size_t i = 0; i < incoming.size(); ++i) {
    if (!out.keys_.insert(keys[i]).second) continue;
    Constraint c = incoming[i];
    c.source_turn = turn;
    out.entries_.push_back(Entry{std::move(c), keys[i], turn});
  }
  return out;
}

namespace {

std::string line_for(const Ledger::Entry& e) { return "[turn " + std::to_string(e.source_turn) + "] " + e.key.text; }

}  // namespace

std::string Ledger::serialize(int budget_tokens) const {
  if (budget_tokens <= 0) throw ContractError("ledger budget must be positive");
  std::vector<std::string> lines;
  lines.reserve(entries_.size());
  std::size_t total = 0;
  for (const auto& e : entries_) {
    lines.push_back(line_for(e));
    total += lines.back().size() + 1;
  }
  if (!lines.empty()) total -= 1;
  const std::size_t budget_chars = static_cast<std::size_t>(budget_tokens) * 4;
  if (total <= budget_chars) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
    return out;
  }

  // Keep the newest suffix that fits together with the elision line.
  std::size_t kept = 0;
  std::size_t kept_chars = 0;
  while (kept < lines.size()) {
    const std::size_t candidate = kept + 1;
    const std::size_t elided = lines.size() - candidate;
    const std::size_t body = kept_chars + lines[lines.size() - candidate].size() + (kept ? 1 : 0);
    const std::size_t header = elided ? std::string("[... " + std::to_string(elided) + " earlier constraints elided]").size() + 1 : 0;
    if (body + header > budget_chars) break;
    kept_chars = body;
    kept = candidate;
  }
  const std::size_t elided = lines.size() - kept;
  std::string out = "[... " + std::to_string(elided) + " earlier constraints elided]";
  for (std::size_t i = elided; i < lines.size(); ++i) out += "\n" + lines[i];
  return out;
}

std::vector<Constraint> Ledger::active_constraints() const {
  std::vector<Constraint> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.constraint);
  return out;
}

nlohmann::ordered_json Ledger::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries_) arr.push_back(constraint_to_json(e.constraint));
  return arr;
}

}  // namespace driftbench
