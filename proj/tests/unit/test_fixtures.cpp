#include <map>

#include "doctest.h"
#include "driftbench/errors.hpp"
#include "driftbench/fixtures.hpp"

using namespace driftbench;

namespace {

std::string pattern(const std::vector<FixtureMark>& marks, MethodKind m) {
  std::string out;
  for (const auto& mk : marks) {
    if (mk.method == m) out += mk.actual ? '1' : '0';
  }
  return out;
}

}  // namespace

TEST_CASE("embedded fixtures replay to their recorded marks") {
  const auto cases = builtin_fixtures();
  REQUIRE(cases.size() == 3);
  std::map<std::string, std::pair<std::string, std::string>> patterns;
  int cells = 0;
  for (const auto& fc : cases) {
    const auto marks = replay_fixture(fc);
    for (const auto& mk : marks) {
      INFO(fc.id << " turn " << mk.turn << " " << to_string(mk.method));
      CHECK(mk.actual == mk.expected);
      if (mk.expected) CHECK(mk.parsed);
      ++cells;
    }
    patterns[fc.id] = {pattern(marks, MethodKind::Direct), pattern(marks, MethodKind::MusRepair)};
  }
  CHECK(cells == 26);
  CHECK(patterns["logic_grid_021"] == std::make_pair(std::string("00000"), std::string("11111")));
  CHECK(patterns["scheduling_249"].second == "1111");
  CHECK(patterns["seating_062"].second == "1110");
  // seating turn 3 direct seats someone at position 8 of 7
  for (const auto& mk : replay_fixture(cases[2])) {
    if (mk.turn == 3 && mk.method == MethodKind::Direct) CHECK_FALSE(mk.parsed);
  }
}

TEST_CASE("fixture json is validated") {
  const auto good = nlohmann::json::parse(embedded_fixtures().begin()->second);
  CHECK_NOTHROW(fixture_from_json(good));
  auto bad = good;
  bad.erase("schema");
  CHECK_THROWS_AS(fixture_from_json(bad), ValidationError);
  bad = good;
  bad["turns"][0]["constraints"][0]["type"] = "levitates";
  CHECK_THROWS_AS(fixture_from_json(bad), ValidationError);
}
