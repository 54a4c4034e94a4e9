#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/constraint.hpp"
#include "driftbench/verifier.hpp"

namespace driftbench {

enum class MethodKind { Direct, Cot, LedgerOnly, MusRepair };
inline constexpr MethodKind kAllMethods[] = {MethodKind::Direct, MethodKind::Cot, MethodKind::LedgerOnly,
                                             MethodKind::MusRepair};

std::string_view to_string(MethodKind method);
MethodKind method_from_string(std::string_view name);
bool uses_ledger(MethodKind method);

/// Template text by file stem (e.g. "system_direct"), compiled in from data/prompts.
const std::map<std::string, std::string>& embedded_prompts();
const std::string& prompt_template(const std::string& name);
const std::string& system_prompt(MethodKind method);

struct Message {
  std::string role;  // system, user, assistant
  std::string content;
};

/// F_t: issue lines always, MUS only when the ledger is UNSAT.
struct RepairPacket {
  std::vector<std::pair<TriggerCode, std::string>> issues;
  std::optional<std::vector<Constraint>> mus;
};

/// `REPAIR REQUIRED`, one `<trigger> : <detail>` line per issue, then one
/// `<key> : "<sentence>" (turn t)` line per MUS member.
std::string render_repair_signal(const RepairPacket& packet, const DomainSchema& s);

/// Shape reminder for the answer object, e.g. `{"<person>": <seat 1-7>}`.
std::string answer_schema_hint(const DomainSchema& s);

/// The per-turn user block: optional ledger state, the new user message,
/// optional repair signal, schema hint.
std::string build_turn_message(const DomainSchema& s, const std::string& utterance,
                               const std::optional<std::string>& ledger_text,
                               const std::optional<std::string>& repair_signal);

/// System + prior (user, assistant) exchanges + the current turn block.
std::vector<Message> build_chat(MethodKind method, const std::vector<std::pair<std::string, std::string>>& history,
                                const std::string& turn_message);

std::vector<Message> build_extraction_chat(const DomainSchema& s, int turn, const std::string& utterance,
                                           const std::string& answer);

struct ExtractionResult {
  std::vector<Constraint> constraints;
  bool empty_flag = true;
};

/// Strict parse of an extractor reply `{"constraints": [...]}`. Entries with
/// unknown types or arguments that do not bind to the schema are dropped.
ExtractionResult parse_extraction_reply(const std::string& text, const DomainSchema& s, int turn);

}  // namespace driftbench
