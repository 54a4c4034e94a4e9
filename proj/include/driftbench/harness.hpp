#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftbench/agents.hpp"
#include "driftbench/verifier.hpp"

namespace driftbench {

struct RunConfig {
  int k = 2;                   // repair attempts
  int truncation_retries = 2;  // echoed; HTTP agents apply it
  int ledger_budget_tokens = kDefaultLedgerBudgetTokens;
  int workers = 1;  // not part of the config hash
  std::uint64_t seed = 0;
  std::vector<MethodKind> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  /// Free-form description folded into the trace header (agent policies, corpus path, split).
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
};

/// Outcome of one verification pass; the repair loop keeps one per attempt.
struct AttemptRecord {
  int attempt = 0;
  std::vector<TriggerCode> triggers;
  bool z3_sat = true;
  Channel channel = Channel::Consistent;
  bool answer_correct = false;
  bool parsed = false;
  bool complete = false;
  int ledger_size = 0;
};

struct TraceRow {
  std::string problem_id;
  DomainKind domain = DomainKind::LogicGrid;
  MethodKind method = MethodKind::Direct;
  std::string agent;
  int turn = 1;
  int attempts = 0;  // repair attempts spent
  bool z3_sat = true;
  std::vector<TriggerCode> triggers;
  Channel channel = Channel::Consistent;
  bool answer_correct = false;
  bool truncated = false;
  bool parsed = false;
  bool complete = false;
  std::string answer;
  int ledger_size = 0;
  std::vector<AttemptRecord> attempt_records;
  std::optional<std::string> error;
};

/// F_t for a failing verdict. The MUS is computed only when the ledger is
/// UNSAT; a conflict detail lists the violated ledger keys.
RepairPacket build_repair_packet(const TurnVerdict& v, const Ledger& ledger);

struct TurnOutcome {
  std::string answer;
  Ledger ledger;
  TraceRow row;
};

/// generate, extract, merge, verify; then for mus_repair up to k rounds of
/// repair, re-extraction merged onto L_{t-1}, and re-verification, stopping
/// at the first clean verdict.
TurnOutcome process_turn(const TurnInput& in, const Ledger& prior, Agent& agent, int k);

std::vector<TraceRow> run_problem(const Problem& p, MethodKind method, Agent& agent, const RunConfig& cfg);

/// Every (agent, method, problem) on `cfg.workers` threads; rows sorted by
/// (agent, method, problem_id, turn).
std::vector<TraceRow> run_corpus(const std::vector<const Problem*>& problems, const std::vector<Agent*>& agents,
                                 const RunConfig& cfg);

nlohmann::ordered_json row_to_json(const TraceRow& row);
TraceRow row_from_json(const nlohmann::json& j);

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

struct Trace {
  nlohmann::json header;
  std::vector<TraceRow> rows;
};

void write_trace(std::ostream& out, const RunConfig& cfg, const std::vector<TraceRow>& rows);
std::string trace_to_string(const RunConfig& cfg, const std::vector<TraceRow>& rows);
Trace read_trace(std::istream& in);
Trace load_trace(const std::string& path);

}  // namespace driftbench
