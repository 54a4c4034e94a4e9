#include <fstream>
#include <sstream>

#include "doctest.h"
#include "driftbench/errors.hpp"
#include "driftbench/prompts.hpp"
#include "driftbench/verifier.hpp"
#include "support.hpp"

using namespace driftbench;
using namespace testsupport;

namespace {

Constraint C(ConstraintType t, std::vector<Arg> args, int turn = 1) { return make_constraint(t, std::move(args), turn); }

DomainSchema seven_seats() {
  return make_seating({"Diana", "Ruby", "Tina", "Noah", "Charlie", "Frank", "Karen"}, TableShape::Round);
}

const char* kGood = R"({"Diana":1,"Ruby":5,"Tina":2,"Noah":4,"Charlie":6,"Frank":7,"Karen":3})";

std::vector<TriggerCode> triggers_of(const TurnVerdict& v) { return v.triggers; }

}  // namespace

TEST_CASE("parse_answer accepts the per-domain shapes") {
  const auto seat = seven_seats();
  auto ok = parse_answer(kGood, seat);
  REQUIRE(std::holds_alternative<Assignment>(ok));
  CHECK(*std::get<Assignment>(ok).cells[6] == 3);

  // fenced, lower-case names, surrounding prose
  auto fenced = parse_answer(std::string("Plan:\n```json\n") +
                                 R"({"diana":1,"ruby":5,"tina":2,"noah":4,"charlie":6,"frank":7,"karen":3})" + "\n```",
                             seat);
  CHECK(std::holds_alternative<Assignment>(fenced));

  const auto sch = scheduling_schema(5);
  auto s = parse_answer(R"({"Sync":{"start":3},"Testing":{"start":5,"duration":2}})", sch);
  REQUIRE(std::holds_alternative<Assignment>(s));
  const auto& a = std::get<Assignment>(s);
  CHECK(*a.cells[sch.duration_cell(0)] == 1);  // defaulted
  CHECK(*a.cells[sch.duration_cell(1)] == 2);
  CHECK_FALSE(a.is_set(sch.start_cell(2)));  // missing entity is not a parse failure

  const auto g = grid_schema();
  auto grid = parse_answer(R"({"Blake":{"color":"red","pet":"Cat","profession":"Doctor"}})", g);
  REQUIRE(std::holds_alternative<Assignment>(grid));
  CHECK(*std::get<Assignment>(grid).cells[0] == 0);
}

TEST_CASE("parse_answer failure reasons") {
  const auto seat = seven_seats();
  auto reason = [&](const std::string& text, const DomainSchema& s) {
    auto r = parse_answer(text, s);
    REQUIRE(std::holds_alternative<ParseFailure>(r));
    return std::get<ParseFailure>(r).reason;
  };
  CHECK(reason("Here is the updated plan: {\"Diana\": 1,", seat) == ParseFailureReason::NotJson);
  CHECK(reason("[1,2,3]", seat) == ParseFailureReason::WrongShape);
  CHECK(reason(R"({"Diana":"one"})", seat) == ParseFailureReason::WrongShape);
  CHECK(reason(R"({"Diana":1,"DIANA":2})", seat) == ParseFailureReason::WrongShape);
  CHECK(reason(R"({"Zed":1})", seat) == ParseFailureReason::UnknownEntity);
  CHECK(reason(R"({"Frank":8})", seat) == ParseFailureReason::OutOfRangeValue);
  CHECK(reason(R"({"Blake":{"color":"Purple"}})", grid_schema()) == ParseFailureReason::OutOfRangeValue);
}

TEST_CASE("strip_code_fence") {
  CHECK(strip_code_fence("```json\n{}\n```") == "{}\n");
  CHECK(strip_code_fence("no fence") == "no fence");
  CHECK(strip_code_fence("```\nunterminated") == "```\nunterminated");
}

TEST_CASE("verify_turn triggers and channels") {
  const auto seat = seven_seats();
  std::vector<Constraint> gold = {C(ConstraintType::AtPosition, {"Karen", 3}), C(ConstraintType::NotAdjacent, {"Karen", "Ruby"})};
  const Ledger ledger = Ledger(seat).merge(gold, 1);

  SUBCASE("consistent") {
    const auto v = verify_turn(ledger, kGood, gold, false);
    CHECK(v.clean());
    CHECK(v.correct_vs_gold);
    CHECK(v.channel == Channel::Consistent);
  }
  SUBCASE("drift on a satisfiable ledger") {
    gold.push_back(C(ConstraintType::NotAdjacent, {"Charlie", "Frank"}, 2));
    const Ledger l2 = ledger.merge(std::vector<Constraint>{gold.back()}, 2);
    const auto v = verify_turn(l2, kGood, gold, false);
    CHECK(triggers_of(v) == std::vector<TriggerCode>{TriggerCode::AnswerLedgerConflict});
    CHECK(v.channel == Channel::Drift);
    CHECK_FALSE(v.correct_vs_gold);
  }
  SUBCASE("an unsat ledger is contradiction whatever the answer") {
    const Ledger bad = ledger.merge(std::vector<Constraint>{C(ConstraintType::AtPosition, {"Karen", 4}, 2)}, 2);
    const auto v = verify_turn(bad, kGood, gold, false);
    CHECK_FALSE(v.ledger_sat);
    CHECK(v.has(TriggerCode::UnsatLedger));
    CHECK_FALSE(v.has(TriggerCode::AnswerLedgerConflict));  // conflict is defined on SAT ledgers only
    CHECK(v.channel == Channel::Contradiction);
    CHECK(v.correct_vs_gold);  // the answer itself is right
  }
  SUBCASE("parse failure") {
    const auto v = verify_turn(ledger, "Here is the updated plan: {", gold, false);
    CHECK(triggers_of(v) == std::vector<TriggerCode>{TriggerCode::AnswerParseFailure});
    CHECK(v.channel == Channel::Other);
    CHECK(v.parse_failure.has_value());
  }
  SUBCASE("incomplete") {
    const auto v = verify_turn(ledger, R"({"Diana":1,"Ruby":5,"Tina":2,"Noah":4,"Charlie":6,"Karen":3})", gold, false);
    CHECK(triggers_of(v) == std::vector<TriggerCode>{TriggerCode::IncompleteAssignment});
    CHECK(v.channel == Channel::Other);
    CHECK_FALSE(v.correct_vs_gold);
  }
  SUBCASE("extraction failure fires only when the turn introduced constraints") {
    CHECK(verify_turn(ledger, kGood, gold, true).has(TriggerCode::ConstraintExtractionFailure));
    CHECK_FALSE(verify_turn(ledger, kGood, gold, true, false).has(TriggerCode::ConstraintExtractionFailure));
  }
  SUBCASE("triggers come out in code order") {
    const Ledger bad = ledger.merge(std::vector<Constraint>{C(ConstraintType::AtPosition, {"Karen", 4}, 2)}, 2);
    const auto v = verify_turn(bad, "nope", gold, true);
    CHECK(triggers_of(v) == std::vector<TriggerCode>{TriggerCode::UnsatLedger, TriggerCode::AnswerParseFailure,
                                                     TriggerCode::ConstraintExtractionFailure});
  }
}

TEST_CASE("trigger and channel names round trip") {
  for (TriggerCode t : kAllTriggers) CHECK(trigger_from_string(to_string(t)) == t);
  CHECK(to_string(TriggerCode::AnswerLedgerConflict) == "answer_ledger_conflict");
  for (Channel c : {Channel::Consistent, Channel::Drift, Channel::Contradiction, Channel::Other}) {
    CHECK(channel_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(trigger_from_string("nope"), ValidationError);
}

TEST_CASE("system prompts are the data files verbatim") {
  const std::pair<MethodKind, const char*> files[] = {{MethodKind::Direct, "system_direct"},
                                                      {MethodKind::Cot, "system_cot"},
                                                      {MethodKind::LedgerOnly, "system_ledger_only"},
                                                      {MethodKind::MusRepair, "system_mus_repair"}};
  for (const auto& [m, name] : files) {
    std::ifstream in(std::string(DRIFTBENCH_SOURCE_DIR) + "/data/prompts/" + name + ".txt", std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    CHECK(system_prompt(m) == ss.str());
  }
  CHECK(embedded_prompts().size() == 8);
}

TEST_CASE("repair signal layout") {
  const auto seat = seven_seats();
  RepairPacket p;
  p.issues.push_back({TriggerCode::UnsatLedger, "the ledger has no solution"});
  p.mus = std::vector<Constraint>{C(ConstraintType::AtPosition, {"Karen", 3}, 1), C(ConstraintType::AtPosition, {"Karen", 4}, 2)};
  const std::string text = render_repair_signal(p, seat);
  CHECK(text.rfind("REPAIR REQUIRED", 0) == 0);
  CHECK(text.find("unsat_ledger : the ledger has no solution") != std::string::npos);
  CHECK(text.find("at_position(karen,3) : \"Karen must sit at position 3.\" (turn 1)") != std::string::npos);
  CHECK(text.find("(turn 2)") != std::string::npos);
}

TEST_CASE("chat assembly") {
  const auto seat = seven_seats();
  const auto msg = build_turn_message(seat, "Karen must sit at position 3.", std::string("[turn 1] x"), std::nullopt);
  CHECK(msg.find("Current ledger:") != std::string::npos);
  CHECK(msg.find("Repair signal:") == std::string::npos);
  const auto chat = build_chat(MethodKind::Cot, {{"u1", "a1"}}, msg);
  REQUIRE(chat.size() == 4);
  CHECK(chat[0].role == "system");
  CHECK(chat[0].content == system_prompt(MethodKind::Cot));
  CHECK(chat[1].content == "u1");
  CHECK(chat[2].role == "assistant");
  CHECK(chat[3].content == msg);
  const auto ex = build_extraction_chat(seat, 2, "Karen must sit at position 3.", kGood);
  CHECK(ex[0].content == prompt_template("system_extraction"));
}

TEST_CASE("parse_extraction_reply keeps only bindable constraints") {
  const auto seat = seven_seats();
  const auto r = parse_extraction_reply(
      R"({"constraints":[{"type":"at_position","args":["Karen",3]},{"type":"at_position","args":["Zed",3]},)"
      R"({"type":"flies","args":[]},{"type":"not_adjacent","args":["Frank","Ruby"]}]})",
      seat, 4);
  REQUIRE(r.constraints.size() == 2);
  CHECK(r.constraints[0].source_turn == 4);
  CHECK_FALSE(r.empty_flag);
  CHECK(parse_extraction_reply("not json", seat, 1).empty_flag);
  CHECK(parse_extraction_reply(R"({"constraints":[]})", seat, 1).empty_flag);
}
