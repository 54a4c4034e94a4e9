#include "driftbench/fixtures.hpp"

#include "driftbench/errors.hpp"
#include "driftbench/ledger.hpp"
#include "driftbench/verifier.hpp"

namespace driftbench {

FixtureCase fixture_from_json(const nlohmann::json& j) {
  try {
    FixtureCase fc;
    fc.id = j.at("id").get<std::string>();
    fc.schema = schema_from_json(j.at("schema"));
    int prev = 0;
    for (const auto& t : j.at("turns")) {
      FixtureTurn ft;
      ft.turn = t.at("turn").get<int>();
      if (ft.turn != prev + 1) throw ValidationError("fixture " + fc.id + ": turns must be numbered 1..T");
      prev = ft.turn;
      for (const auto& c : t.at("constraints")) {
        Constraint parsed = constraint_from_json(c);
        parsed.source_turn = ft.turn;
        ft.constraints.push_back(std::move(parsed));
      }
      for (MethodKind m : kAllMethods) {
        const std::string name(to_string(m));
        if (!t.contains(name)) continue;
        const auto& a = t.at(name);
        ft.answers[m] = a.is_string() ? a.get<std::string>() : a.dump();
        ft.expected[m] = t.at(name + "_mark").get<bool>();
      }
      fc.turns.push_back(std::move(ft));
    }
    return fc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed fixture: ") + e.what());
  }
}

std::vector<FixtureCase> builtin_fixtures() {
  std::vector<FixtureCase> out;
  for (const auto& [name, text] : embedded_fixtures()) out.push_back(fixture_from_json(nlohmann::json::parse(text)));
  return out;
}

std::vector<FixtureMark> replay_fixture(const FixtureCase& fc) {
  std::vector<FixtureMark> marks;
  Ledger ledger(fc.schema);
  std::vector<Constraint> gold;
  for (const auto& t : fc.turns) {
    ledger = ledger.merge(t.constraints, t.turn);
    gold.insert(gold.end(), t.constraints.begin(), t.constraints.end());
    for (const auto& [method, answer] : t.answers) {
      const TurnVerdict v = verify_turn(ledger, answer, gold, false, !t.constraints.empty());
      marks.push_back(FixtureMark{fc.id, t.turn, method, t.expected.at(method), v.correct_vs_gold, v.parsed,
                                  v.triggers});
    }
  }
  return marks;
}

}  // namespace driftbench
