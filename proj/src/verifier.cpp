#include "driftbench/verifier.hpp"

#include <algorithm>

#include "driftbench/errors.hpp"
#include "driftbench/solver.hpp"

namespace driftbench {

namespace {

constexpr std::string_view kTriggerNames[] = {"answer_ledger_conflict", "unsat_ledger", "incomplete_assignment",
                                              "answer_parse_failure", "constraint_extraction_failure"};
constexpr std::string_view kChannelNames[] = {"consistent", "drift", "contradiction", "other"};
constexpr std::string_view kReasonNames[] = {"not_json", "wrong_shape", "unknown_entity", "out_of_range_value"};

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

ParseFailure fail(ParseFailureReason reason, std::string detail) { return ParseFailure{reason, std::move(detail)}; }

std::optional<int> as_int(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d == static_cast<int>(d)) return static_cast<int>(d);
  }
  return std::nullopt;
}

}  // namespace

std::string strip_code_fence(const std::string& text) {
  const auto open = text.find("```");
  if (open == std::string::npos) return text;
  auto body = text.find('\n', open);
  if (body == std::string::npos) return text;
  const auto close = text.find("```", body + 1);
  if (close == std::string::npos) return text;
  return text.substr(body + 1, close - body - 1);
}

std::string_view to_string(TriggerCode code) { return kTriggerNames[static_cast<int>(code)]; }

TriggerCode trigger_from_string(std::string_view name) {
  for (int i = 0; i < kTriggerCodeCount; ++i) {
    if (kTriggerNames[i] == name) return static_cast<TriggerCode>(i);
  }
  throw ValidationError("unknown trigger code '" + std::string(name) + "'");
}

std::string_view to_string(Channel channel) { return kChannelNames[static_cast<int>(channel)]; }

Channel channel_from_string(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kChannelNames[i] == name) return static_cast<Channel>(i);
  }
  throw ValidationError("unknown channel '" + std::string(name) + "'");
}

std::string_view to_string(ParseFailureReason reason) { return kReasonNames[static_cast<int>(reason)]; }

ParseOutcome parse_answer(const std::string& text, const DomainSchema& s) {
  const std::string body = trim(strip_code_fence(text));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return fail(ParseFailureReason::NotJson, "response is not a single JSON value");
  }
  if (!j.is_object()) return fail(ParseFailureReason::WrongShape, "answer must be a JSON object");

  Assignment a = Assignment::empty_for(s);
  std::vector<bool> seen(s.entities.size(), false);
  for (const auto& [key, value] : j.items()) {
    const auto e = s.entity_index(key);
    if (!e) return fail(ParseFailureReason::UnknownEntity, "unknown entity '" + key + "'");
    if (seen[*e]) return fail(ParseFailureReason::WrongShape, "entity '" + key + "' appears twice");
    seen[*e] = true;

    switch (s.kind) {
      case DomainKind::LogicGrid: {
        if (!value.is_object()) return fail(ParseFailureReason::WrongShape, key + ": expected {category: value}");
        for (const auto& [cat_name, v] : value.items()) {
          const auto c = s.category_index(cat_name);
          if (!c) return fail(ParseFailureReason::WrongShape, key + ": unknown category '" + cat_name + "'");
          if (!v.is_string()) return fail(ParseFailureReason::WrongShape, key + "." + cat_name + ": expected a string");
          const auto idx = s.value_index(*c, v.get<std::string>());
          if (!idx) {
            return fail(ParseFailureReason::OutOfRangeValue,
                        key + "." + cat_name + ": '" + v.get<std::string>() + "' is not a listed value");
          }
          a.cells[s.grid_cell(*e, *c)] = *idx;
        }
        break;
      }
      case DomainKind::Scheduling: {
        if (!value.is_object() || !value.contains("start")) {
          return fail(ParseFailureReason::WrongShape, key + ": expected {\"start\": int, \"duration\": int}");
        }
        const auto start = as_int(value["start"]);
        const auto duration = value.contains("duration") ? as_int(value["duration"]) : std::optional<int>(1);
        if (!start || !duration) return fail(ParseFailureReason::WrongShape, key + ": start/duration must be integers");
        if (*start < 1 || *start > s.slot_count || *duration < 1 || *duration > s.max_duration ||
            *start + *duration - 1 > s.slot_count) {
          return fail(ParseFailureReason::OutOfRangeValue, key + ": start " + std::to_string(*start) + " duration " +
                                                               std::to_string(*duration) + " leaves slots 1.." +
                                                               std::to_string(s.slot_count));
        }
        a.cells[s.start_cell(*e)] = *start;
        a.cells[s.duration_cell(*e)] = *duration;
        break;
      }
      case DomainKind::Seating: {
        const auto seat = as_int(value);
        if (!seat) return fail(ParseFailureReason::WrongShape, key + ": seat must be an integer");
        if (*seat < 1 || *seat > s.seat_count()) {
          return fail(ParseFailureReason::OutOfRangeValue,
                      key + ": seat " + std::to_string(*seat) + " outside 1.." + std::to_string(s.seat_count()));
        }
        a.cells[s.seat_cell(*e)] = *seat;
        break;
      }
    }
  }
  return a;
}

bool TurnVerdict::has(TriggerCode code) const {
  return std::find(triggers.begin(), triggers.end(), code) != triggers.end();
}

Channel classify_channel(const TurnVerdict& v) {
  if (!v.ledger_sat) return Channel::Contradiction;
  if (!v.parsed || !v.complete) return Channel::Other;
  if (!v.satisfies_ledger) return Channel::Drift;
  return Channel::Consistent;
}

TurnVerdict verify_turn(const Ledger& ledger, const std::string& answer, std::span<const Constraint> gold,
                        bool extraction_empty, bool turn_introduces) {
  const DomainSchema& s = ledger.schema();
  TurnVerdict v;
  const auto active = ledger.active_constraints();
  v.ledger_sat = check_sat(s, active).sat;

  ParseOutcome outcome = parse_answer(answer, s);
  if (auto* a = std::get_if<Assignment>(&outcome)) {
    v.parsed = true;
    v.validation = schema_validate(*a, s);
    v.complete = v.validation.complete();
    if (v.complete) {
      v.satisfies_ledger = satisfies(*a, active, s);
      v.correct_vs_gold = satisfies(*a, gold, s);
    }
    v.assignment = std::move(*a);
  } else {
    v.parse_failure = std::get<ParseFailure>(outcome);
  }

  if (v.ledger_sat && v.parsed && v.complete && !v.satisfies_ledger) v.triggers.push_back(TriggerCode::AnswerLedgerConflict);
  if (!v.ledger_sat) v.triggers.push_back(TriggerCode::UnsatLedger);
  if (v.parsed && !v.complete) v.triggers.push_back(TriggerCode::IncompleteAssignment);
  if (!v.parsed) v.triggers.push_back(TriggerCode::AnswerParseFailure);
  if (extraction_empty && turn_introduces) v.triggers.push_back(TriggerCode::ConstraintExtractionFailure);
  v.channel = classify_channel(v);
  return v;
}

}  // namespace driftbench
