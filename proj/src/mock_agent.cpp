#include <algorithm>
#include <set>

#include "driftbench/agents.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/solver.hpp"
#include "driftbench/utterance.hpp"

namespace driftbench {

namespace {

Assignment solve(const DomainSchema& s, const std::vector<Constraint>& cs) {
  auto r = check_sat(s, cs);
  if (!r.sat) throw ContractError("mock agent asked to solve an unsatisfiable set");
  return std::move(*r.witness);
}

std::vector<Constraint> non_tautological(const std::vector<Constraint>& cs, const DomainSchema& s) {
  std::vector<Constraint> out;
  for (const auto& c : cs) {
    if (!is_tautology(c, s)) out.push_back(c);
  }
  return out;
}

// An assignment that breaks one gold constraint but keeps the rest where it can.
std::optional<Assignment> drifted(Rng& rng, const DomainSchema& s, const std::vector<Constraint>& gold) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!is_tautology(gold[i], s)) order.push_back(i);
  }
  if (order.empty()) return std::nullopt;
  rng.shuffle(order);
  for (std::size_t i : order) {
    const auto contra = contradicting_constraint(gold[i], s);
    if (!contra) continue;
    std::vector<Constraint> target;
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (j != i) target.push_back(gold[j]);
    }
    target.push_back(*contra);
    if (auto r = check_sat(s, target); r.sat) return std::move(*r.witness);
  }
  for (std::size_t i : order) {
    const auto contra = contradicting_constraint(gold[i], s);
    if (!contra) continue;
    const std::vector<Constraint> alone = {*contra};
    if (auto r = check_sat(s, alone); r.sat) return std::move(*r.witness);
  }
  return std::nullopt;
}

}  // namespace

void validate_policy(const MockPolicy& p) {
  for (double v : {p.p_drift, p.p_contra, p.p_parse, p.p_incomplete, p.repair_competence}) {
    if (!(v >= 0 && v <= 1)) throw ValidationError("mock policy probabilities must lie in [0, 1]");
  }
}

nlohmann::ordered_json policy_to_json(const MockPolicy& p) {
  nlohmann::ordered_json j;
  j["p_drift"] = p.p_drift;
  j["p_contra"] = p.p_contra;
  j["p_parse"] = p.p_parse;
  j["p_incomplete"] = p.p_incomplete;
  j["repair_competence"] = p.repair_competence;
  return j;
}

MockPolicy policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("mock policy must be a JSON object");
  static const std::set<std::string> known = {"p_drift", "p_contra", "p_parse", "p_incomplete", "repair_competence"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown mock policy field '" + key + "'");
    if (!value.is_number()) throw ValidationError("mock policy field '" + key + "' must be a number");
  }
  MockPolicy p;
  p.p_drift = j.value("p_drift", 0.0);
  p.p_contra = j.value("p_contra", 0.0);
  p.p_parse = j.value("p_parse", 0.0);
  p.p_incomplete = j.value("p_incomplete", 0.0);
  p.repair_competence = j.value("repair_competence", 0.0);
  validate_policy(p);
  return p;
}

std::string format_answer(const nlohmann::ordered_json& answer, MethodKind method, int turn) {
  if (method != MethodKind::Cot) return answer.dump();
  return "- Collected the constraints stated through turn " + std::to_string(turn) +
         ".\n- Chose values that satisfy all of them.\n```json\n" + answer.dump() + "\n```";
}

MockAgent::MockAgent(MockPolicy policy, std::uint64_t seed, std::string id)
    : policy_(policy), seed_(seed), id_(std::move(id)) {
  validate_policy(policy_);
}

std::uint64_t MockAgent::stream(const TurnInput& in, int attempt, std::string_view role) const {
  return derive_seed(seed_, id_ + "/" + std::string(to_string(in.method)) + "/" + in.problem->id + "/" +
                                std::to_string(in.turn) + "/" + std::to_string(attempt) + "/" + std::string(role));
}

AgentReply MockAgent::generate(const TurnInput& in) {
  if (in.problem == nullptr) throw ContractError("mock agent needs the problem");
  const DomainSchema& s = in.problem->schema;
  const auto gold = in.problem->gold_prefix(in.turn);
  Rng rng(stream(in, 0, "answer"));

  if (rng.bernoulli(policy_.p_parse)) {
    const std::string body = assignment_to_json(solve(s, gold), s).dump();
    return {"Here is the updated plan: " + body.substr(0, body.size() / 2)};
  }
  if (rng.bernoulli(policy_.p_incomplete)) {
    auto answer = assignment_to_json(solve(s, gold), s);
    answer.erase(s.entities[rng.index(s.entities.size())]);
    return {format_answer(answer, in.method, in.turn)};
  }
  if (rng.bernoulli(policy_.p_drift)) {
    if (auto a = drifted(rng, s, gold)) return {format_answer(assignment_to_json(*a, s), in.method, in.turn)};
  }
  return {format_answer(assignment_to_json(solve(s, gold), s), in.method, in.turn)};
}

ExtractionResult MockAgent::extract(const TurnInput& in, const std::string& /*answer*/, int /*attempt*/) {
  if (in.problem == nullptr) throw ContractError("mock agent needs the problem");
  const DomainSchema& s = in.problem->schema;
  ExtractionResult out;
  out.constraints = extract_from_utterance(in.utterance, in.turn);

  Rng rng(stream(in, 0, "contra"));
  if (rng.bernoulli(policy_.p_contra)) {
    std::vector<Constraint> pool = in.prior_ledger ? in.prior_ledger->active_constraints() : std::vector<Constraint>{};
    pool.insert(pool.end(), out.constraints.begin(), out.constraints.end());
    pool = non_tautological(pool, s);
    if (!pool.empty()) {
      if (auto contra = contradicting_constraint(pool[rng.index(pool.size())], s)) {
        contra->source_turn = in.turn;
        out.constraints.push_back(*contra);
      }
    }
  }
  out.empty_flag = out.constraints.empty();
  return out;
}

AgentReply MockAgent::repair(const TurnInput& in, const std::string& previous_answer, const RepairPacket& packet,
                             int attempt) {
  if (in.problem == nullptr) throw ContractError("mock agent needs the problem");
  Rng rng(stream(in, attempt, "repair"));
  if (!rng.bernoulli(policy_.repair_competence)) return {previous_answer};

  const DomainSchema& s = in.problem->schema;
  auto gold = in.problem->gold_prefix(in.turn);
  if (packet.mus) {
    std::set<int> turns;
    for (const auto& c : *packet.mus) turns.insert(c.source_turn);
    std::stable_partition(gold.begin(), gold.end(), [&](const Constraint& c) { return turns.count(c.source_turn) > 0; });
  }
  return {format_answer(assignment_to_json(solve(s, gold), s), in.method, in.turn)};
}

}  // namespace driftbench
