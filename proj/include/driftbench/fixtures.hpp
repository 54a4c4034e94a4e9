#pragma once

#include <map>
#include <string>
#include <vector>

#include "driftbench/constraint.hpp"
#include "driftbench/prompts.hpp"

namespace driftbench {

/// A hand-transcribed multi-turn case: gold constraints per turn plus a
/// recorded answer and its expected correctness for two methods.
struct FixtureTurn {
  int turn = 1;
  std::vector<Constraint> constraints;
  std::map<MethodKind, std::string> answers;  // answer text as the model would emit it
  std::map<MethodKind, bool> expected;
};

struct FixtureCase {
  std::string id;
  DomainSchema schema;
  std::vector<FixtureTurn> turns;
};

const std::map<std::string, std::string>& embedded_fixtures();

FixtureCase fixture_from_json(const nlohmann::json& j);
/// Every embedded case, sorted by id.
std::vector<FixtureCase> builtin_fixtures();

struct FixtureMark {
  std::string id;
  int turn = 0;
  MethodKind method = MethodKind::Direct;
  bool expected = false;
  bool actual = false;
  bool parsed = false;
  std::vector<TriggerCode> triggers;
};

/// Replays the recorded answers against the gold ledger turn by turn.
std::vector<FixtureMark> replay_fixture(const FixtureCase& fc);

}  // namespace driftbench
