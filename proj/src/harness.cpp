#include "driftbench/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "driftbench/errors.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/solver.hpp"

namespace driftbench {

namespace {

AttemptRecord record(int attempt, const TurnVerdict& v, const Ledger& ledger) {
  return AttemptRecord{attempt,     v.triggers, v.ledger_sat, v.channel, v.correct_vs_gold,
                       v.parsed,    v.complete, static_cast<int>(ledger.size())};
}

std::string join_keys(const std::vector<Constraint>& cs, const DomainSchema& s) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    out += (i ? ", " : "") + canonicalize(cs[i], s).text + " (turn " + std::to_string(cs[i].source_turn) + ")";
  }
  return out;
}

nlohmann::ordered_json triggers_json(const std::vector<TriggerCode>& ts) {
  auto arr = nlohmann::ordered_json::array();
  for (TriggerCode t : ts) arr.push_back(std::string(to_string(t)));
  return arr;
}

std::vector<TriggerCode> triggers_from_json(const nlohmann::json& j) {
  std::vector<TriggerCode> out;
  for (const auto& t : j) out.push_back(trigger_from_string(t.get<std::string>()));
  return out;
}

}  // namespace

RepairPacket build_repair_packet(const TurnVerdict& v, const Ledger& ledger) {
  const DomainSchema& s = ledger.schema();
  RepairPacket packet;
  for (TriggerCode t : v.triggers) {
    std::string detail;
    switch (t) {
      case TriggerCode::UnsatLedger:
        detail = "the committed constraints cannot all hold together; revisit the conflicting subset below";
        break;
      case TriggerCode::AnswerLedgerConflict:
        detail = "the answer violates " +
                 join_keys(violated_constraints(*v.assignment, ledger.active_constraints(), s), s);
        break;
      case TriggerCode::IncompleteAssignment: detail = v.validation.summary(); break;
      case TriggerCode::AnswerParseFailure:
        detail = std::string(to_string(v.parse_failure->reason)) + ": " + v.parse_failure->detail;
        break;
      case TriggerCode::ConstraintExtractionFailure:
        detail = "no constraints could be extracted for the latest turn";
        break;
    }
    packet.issues.emplace_back(t, std::move(detail));
  }
  if (v.has(TriggerCode::UnsatLedger)) packet.mus = extract_mus(s, ledger.active_constraints()).subset;
  return packet;
}

TurnOutcome process_turn(const TurnInput& in, const Ledger& prior, Agent& agent, int k) {
  const Problem& p = *in.problem;
  const auto gold = p.gold_prefix(in.turn);
  const bool introduces = !p.turns.at(in.turn - 1).constraints.empty();

  TraceRow row;
  row.problem_id = p.id;
  row.domain = p.domain;
  row.method = in.method;
  row.agent = agent.id();
  row.turn = in.turn;

  AgentReply reply = agent.generate(in);
  ExtractionResult ext = agent.extract(in, reply.text, 0);
  Ledger ledger = prior.merge(ext.constraints, in.turn);
  TurnVerdict verdict = verify_turn(ledger, reply.text, gold, ext.empty_flag, introduces);
  row.attempt_records.push_back(record(0, verdict, ledger));

  if (in.method == MethodKind::MusRepair) {
    while (!verdict.clean() && row.attempts < k) {
      ++row.attempts;
      const RepairPacket packet = build_repair_packet(verdict, ledger);
      reply = agent.repair(in, reply.text, packet, row.attempts);
      ext = agent.extract(in, reply.text, row.attempts);
      ledger = prior.merge(ext.constraints, in.turn);
      verdict = verify_turn(ledger, reply.text, gold, ext.empty_flag, introduces);
      row.attempt_records.push_back(record(row.attempts, verdict, ledger));
    }
  }

  row.z3_sat = verdict.ledger_sat;
  row.triggers = verdict.triggers;
  row.channel = verdict.channel;
  row.answer_correct = verdict.correct_vs_gold;
  row.truncated = reply.truncated;
  row.parsed = verdict.parsed;
  row.complete = verdict.complete;
  row.answer = reply.text;
  row.ledger_size = static_cast<int>(ledger.size());
  return TurnOutcome{reply.text, std::move(ledger), std::move(row)};
}

std::vector<TraceRow> run_problem(const Problem& p, MethodKind method, Agent& agent, const RunConfig& cfg) {
  std::vector<TraceRow> rows;
  Ledger ledger(p.schema);
  std::vector<std::pair<std::string, std::string>> history;
  for (const auto& turn : p.turns) {
    TurnInput in;
    in.problem = &p;
    in.method = method;
    in.turn = turn.turn;
    in.utterance = turn.utterance;
    in.history = history;
    if (uses_ledger(method)) in.ledger_text = ledger.serialize(cfg.ledger_budget_tokens);
    in.prior_ledger = &ledger;

    std::string answer;
    try {
      TurnOutcome out = process_turn(in, ledger, agent, cfg.k);
      answer = out.answer;
      ledger = std::move(out.ledger);
      rows.push_back(std::move(out.row));
    } catch (const std::exception& e) {
      // errored turn: incorrect, unparsed, ledger carried forward unchanged
      TraceRow row;
      row.problem_id = p.id;
      row.domain = p.domain;
      row.method = method;
      row.agent = agent.id();
      row.turn = turn.turn;
      row.z3_sat = check_sat(p.schema, ledger.active_constraints()).sat;
      row.channel = row.z3_sat ? Channel::Other : Channel::Contradiction;
      row.ledger_size = static_cast<int>(ledger.size());
      row.error = e.what();
      rows.push_back(std::move(row));
    }
    history.emplace_back(turn.utterance, answer);
  }
  return rows;
}

std::vector<TraceRow> run_corpus(const std::vector<const Problem*>& problems, const std::vector<Agent*>& agents,
                                 const RunConfig& cfg) {
  struct Unit {
    Agent* agent;
    MethodKind method;
    const Problem* problem;
  };
  std::vector<Unit> units;
  for (Agent* a : agents) {
    for (MethodKind m : cfg.methods) {
      for (const Problem* p : problems) units.push_back({a, m, p});
    }
  }
  std::vector<std::vector<TraceRow>> results(units.size());
  parallel_for(units.size(), cfg.workers, [&](std::size_t i) {
    results[i] = run_problem(*units[i].problem, units[i].method, *units[i].agent, cfg);
  });
  std::vector<TraceRow> rows;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(rows));
  std::stable_sort(rows.begin(), rows.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::make_tuple(std::cref(a.agent), to_string(a.method), std::cref(a.problem_id), a.turn) <
           std::make_tuple(std::cref(b.agent), to_string(b.method), std::cref(b.problem_id), b.turn);
  });
  return rows;
}

nlohmann::ordered_json row_to_json(const TraceRow& row) {
  nlohmann::ordered_json j;
  j["problem_id"] = row.problem_id;
  j["domain"] = std::string(to_string(row.domain));
  j["method"] = std::string(to_string(row.method));
  j["agent"] = row.agent;
  j["turn"] = row.turn;
  j["attempts"] = row.attempts;
  j["z3_sat"] = row.z3_sat;
  j["triggers"] = triggers_json(row.triggers);
  j["channel"] = std::string(to_string(row.channel));
  j["answer_correct"] = row.answer_correct;
  j["truncated"] = row.truncated;
  j["parsed"] = row.parsed;
  j["complete"] = row.complete;
  j["answer"] = row.answer;
  j["ledger_size"] = row.ledger_size;
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : row.attempt_records) {
    nlohmann::ordered_json rj;
    rj["attempt"] = r.attempt;
    rj["triggers"] = triggers_json(r.triggers);
    rj["z3_sat"] = r.z3_sat;
    rj["channel"] = std::string(to_string(r.channel));
    rj["answer_correct"] = r.answer_correct;
    rj["parsed"] = r.parsed;
    rj["complete"] = r.complete;
    rj["ledger_size"] = r.ledger_size;
    records.push_back(rj);
  }
  j["attempt_records"] = records;
  j["error"] = row.error ? nlohmann::ordered_json(*row.error) : nlohmann::ordered_json();
  return j;
}

TraceRow row_from_json(const nlohmann::json& j) {
  TraceRow row;
  try {
    row.problem_id = j.at("problem_id").get<std::string>();
    row.domain = domain_from_string(j.at("domain").get<std::string>());
    row.method = method_from_string(j.at("method").get<std::string>());
    row.agent = j.at("agent").get<std::string>();
    row.turn = j.at("turn").get<int>();
    row.attempts = j.at("attempts").get<int>();
    row.z3_sat = j.at("z3_sat").get<bool>();
    row.triggers = triggers_from_json(j.at("triggers"));
    row.channel = channel_from_string(j.at("channel").get<std::string>());
    row.answer_correct = j.at("answer_correct").get<bool>();
    row.truncated = j.at("truncated").get<bool>();
    row.parsed = j.at("parsed").get<bool>();
    row.complete = j.at("complete").get<bool>();
    row.answer = j.value("answer", "");
    row.ledger_size = j.value("ledger_size", 0);
    if (j.contains("attempt_records")) {
      for (const auto& rj : j["attempt_records"]) {
        AttemptRecord r;
        r.attempt = rj.at("attempt").get<int>();
        r.triggers = triggers_from_json(rj.at("triggers"));
        r.z3_sat = rj.at("z3_sat").get<bool>();
        r.channel = channel_from_string(rj.at("channel").get<std::string>());
        r.answer_correct = rj.at("answer_correct").get<bool>();
        r.parsed = rj.at("parsed").get<bool>();
        r.complete = rj.at("complete").get<bool>();
        r.ledger_size = rj.value("ledger_size", 0);
        row.attempt_records.push_back(std::move(r));
      }
    }
    if (j.contains("error") && j["error"].is_string()) row.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed trace row: ") + e.what());
  }
  return row;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["k"] = cfg.k;
  j["truncation_retries"] = cfg.truncation_retries;
  j["ledger_budget_tokens"] = cfg.ledger_budget_tokens;
  j["seed"] = cfg.seed;
  auto methods = nlohmann::ordered_json::array();
  for (MethodKind m : cfg.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["echo"] = cfg.echo;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << stable_hash(run_config_to_json(cfg).dump());
  return out.str();
}

void write_trace(std::ostream& out, const RunConfig& cfg, const std::vector<TraceRow>& rows) {
  nlohmann::ordered_json header;
  header["format"] = "driftbench-trace";
  header["version"] = 1;
  header["config_hash"] = config_hash(cfg);
  header["config"] = run_config_to_json(cfg);
  out << header.dump() << '\n';
  for (const auto& r : rows) out << row_to_json(r).dump() << '\n';
}

std::string trace_to_string(const RunConfig& cfg, const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  write_trace(out, cfg, rows);
  return out.str();
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace is empty");
  try {
    t.header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("trace header is not JSON: ") + e.what());
  }
  if (t.header.value("format", "") != "driftbench-trace" || t.header.value("version", 0) != 1) {
    throw ValidationError("not a version-1 driftbench trace");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      t.rows.push_back(row_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("trace line is not JSON: ") + e.what());
    }
  }
  return t;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace " + path);
  return read_trace(in);
}

}  // namespace driftbench
