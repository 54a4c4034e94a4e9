#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "driftbench/assignment.hpp"
#include "driftbench/ledger.hpp"

namespace driftbench {

enum class TriggerCode {
  AnswerLedgerConflict,
  UnsatLedger,
  IncompleteAssignment,
  AnswerParseFailure,
  ConstraintExtractionFailure,
};
inline constexpr int kTriggerCodeCount = 5;
inline constexpr TriggerCode kAllTriggers[] = {
    TriggerCode::AnswerLedgerConflict, TriggerCode::UnsatLedger, TriggerCode::IncompleteAssignment,
    TriggerCode::AnswerParseFailure, TriggerCode::ConstraintExtractionFailure};

std::string_view to_string(TriggerCode code);
TriggerCode trigger_from_string(std::string_view name);

enum class Channel { Consistent, Drift, Contradiction, Other };
std::string_view to_string(Channel channel);
Channel channel_from_string(std::string_view name);

enum class ParseFailureReason { NotJson, WrongShape, UnknownEntity, OutOfRangeValue };
std::string_view to_string(ParseFailureReason reason);

struct ParseFailure {
  ParseFailureReason reason;
  std::string detail;
};

using ParseOutcome = std::variant<Assignment, ParseFailure>;

/// Body of the first ``` fenced block (language tag dropped), or `text`
/// unchanged when there is no complete fence.
std::string strip_code_fence(const std::string& text);

/// Strict per-domain answer parse. One fenced code block, if present, is
/// unwrapped first; everything else must be a single JSON object. Entities
/// may be missing (that is a completeness failure, not a parse failure).
ParseOutcome parse_answer(const std::string& text, const DomainSchema& s);

struct TurnVerdict {
  bool parsed = false;
  bool complete = false;
  bool ledger_sat = false;
  bool satisfies_ledger = false;  // meaningful only when parsed && complete
  bool correct_vs_gold = false;
  std::vector<TriggerCode> triggers;  // enum order, no repeats
  Channel channel = Channel::Other;

  std::optional<Assignment> assignment;
  std::optional<ParseFailure> parse_failure;
  ValidationReport validation;

  bool has(TriggerCode code) const;
  /// sat and no triggers: the repair loop's break condition
  bool clean() const { return ledger_sat && triggers.empty(); }
};

/// contradiction > drift > other > consistent
Channel classify_channel(const TurnVerdict& v);

/// `ledger` is L_t (already merged with this turn's extraction); `gold` is
/// C_{1:t}. `turn_introduces` says whether the user turn carried new
/// constraints, which gates constraint_extraction_failure.
TurnVerdict verify_turn(const Ledger& ledger, const std::string& answer, std::span<const Constraint> gold,
                        bool extraction_empty, bool turn_introduces = true);

}  // namespace driftbench
