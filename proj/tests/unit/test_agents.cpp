#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "driftbench/agents.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/generator.hpp"
#include "driftbench/solver.hpp"
#include "driftbench/verifier.hpp"
#include "httplib.h"

using namespace driftbench;

namespace {

Corpus tiny_corpus(std::uint64_t seed = 3) {
  GeneratorConfig cfg;
  cfg.master_seed = seed;
  cfg.count_per_domain = 4;
  return generate_corpus(cfg);
}

TurnInput input_for(const Problem& p, MethodKind m, int turn, const Ledger* prior) {
  TurnInput in;
  in.problem = &p;
  in.method = m;
  in.turn = turn;
  in.utterance = p.turns[turn - 1].utterance;
  in.prior_ledger = prior;
  return in;
}

// A local chat-completions server whose behaviour is picked by the model name.
class FakeServer {
 public:
  FakeServer() {
    server_.Post(R"(/(.*)v1/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      {
        std::lock_guard<std::mutex> lock(mu_);
        bodies.push_back(body);
        paths.push_back(req.path);
        auth.push_back(req.get_header_value("Authorization"));
      }
      const std::string model = body.at("model");
      const int n = ++calls_;
      auto reply = [&](const std::string& content, const std::string& finish) {
        nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", finish}}}}};
        res.set_content(out.dump(), "application/json");
      };
      if (model == "busy") {
        res.status = 429;
        res.set_header("Retry-After", "7");
        res.set_content("slow down", "text/plain");
      } else if (model == "trunc-once") {
        reply(n == 1 ? "{\"Avery\":" : "{\"Avery\": 1}", n == 1 ? "length" : "stop");
      } else if (model == "trunc-always") {
        reply("{\"Avery\":", "length");
      } else if (model == "garbage") {
        res.set_content("not json", "application/json");
      } else if (model == "extractor") {
        reply(R"({"constraints":[{"type":"at_position","args":["Avery",1]}]})", "stop");
      } else {
        reply("{}", "stop");
      }
    });
    port = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port) + prefix;
  }

  int port = 0;
  std::vector<nlohmann::json> bodies;
  std::vector<std::string> paths;
  std::vector<std::string> auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  std::mutex mu_;
  std::atomic<int> calls_{0};
};

HttpAgent agent_for(const FakeServer& srv, const std::string& model, const std::string& prefix = "") {
  HttpAgentConfig cfg;
  cfg.endpoint = srv.endpoint(prefix);
  cfg.model = model;
  cfg.api_key_env = "DRIFTBENCH_TEST_KEY";
  cfg.timeout_seconds = 5;
  return HttpAgent(cfg);
}

}  // namespace

TEST_CASE("oracle mock answers every turn correctly") {
  const Corpus c = tiny_corpus();
  MockAgent agent(MockPolicy::oracle(), 1);
  for (const auto& p : c.problems) {
    for (MethodKind m : kAllMethods) {
      Ledger ledger(p.schema);
      for (int t = 1; t <= p.turn_count(); ++t) {
        const auto in = input_for(p, m, t, &ledger);
        const auto reply = agent.generate(in);
        const auto ex = agent.extract(in, reply.text, 0);
        const auto gold = p.gold_prefix(t);
        ledger = ledger.merge(ex.constraints, t);
        const auto v = verify_turn(ledger, reply.text, gold, ex.empty_flag);
        CHECK(v.correct_vs_gold);
        std::string fired;
        for (TriggerCode code : v.triggers) fired += std::string(to_string(code)) + " ";
        INFO(p.id << " turn " << t << ": " << fired);
        CHECK(v.triggers.empty());
        if (m == MethodKind::Cot) CHECK(reply.text.find("```json") != std::string::npos);
      }
    }
  }
}

TEST_CASE("mock faults fire as configured") {
  const Corpus c = tiny_corpus();
  const Problem& p = c.problems.front();
  const Ledger empty(p.schema);

  MockPolicy parse;
  parse.p_parse = 1;
  MockAgent parse_agent(parse, 1);
  const auto bad = parse_agent.generate(input_for(p, MethodKind::Direct, 1, &empty));
  CHECK(std::holds_alternative<ParseFailure>(parse_answer(bad.text, p.schema)));

  MockPolicy incomplete;
  incomplete.p_incomplete = 1;
  MockAgent inc_agent(incomplete, 1);
  const auto part = inc_agent.generate(input_for(p, MethodKind::Direct, 2, &empty));
  auto parsed = parse_answer(part.text, p.schema);
  REQUIRE(std::holds_alternative<Assignment>(parsed));
  CHECK_FALSE(schema_validate(std::get<Assignment>(parsed), p.schema).complete());
  CHECK(nlohmann::json::parse(part.text).size() == p.schema.entities.size() - 1);

  MockPolicy contra;
  contra.p_contra = 1;
  MockAgent contra_agent(contra, 1);
  const auto in = input_for(p, MethodKind::Direct, 1, &empty);
  const auto ex = contra_agent.extract(in, "", 0);
  CHECK(ex.constraints.size() == p.turns[0].constraints.size() + 1);
  CHECK_FALSE(check_sat(p.schema, ex.constraints).sat);
  // keyed per turn, not per attempt
  CHECK(contra_agent.extract(in, "", 1).constraints == ex.constraints);

  MockPolicy drift;
  drift.p_drift = 1;
  MockAgent drift_agent(drift, 1);
  int wrong = 0;
  for (int t = 1; t <= p.turn_count(); ++t) {
    const auto r = drift_agent.generate(input_for(p, MethodKind::Direct, t, &empty));
    const auto v = verify_turn(empty.merge(p.gold_prefix(t), t), r.text, p.gold_prefix(t), false);
    wrong += !v.correct_vs_gold;
    CHECK(v.parsed);
    CHECK(v.complete);
  }
  CHECK(wrong == p.turn_count());
}

TEST_CASE("mock draws are deterministic per seed") {
  const Corpus c = tiny_corpus();
  MockPolicy noisy{0.4, 0.2, 0.1, 0.1, 0.5};
  MockAgent a(noisy, 11), b(noisy, 11), other(noisy, 12);
  int differ = 0;
  for (const auto& p : c.problems) {
    const Ledger empty(p.schema);
    for (int t = 1; t <= p.turn_count(); ++t) {
      const auto in = input_for(p, MethodKind::Direct, t, &empty);
      CHECK(a.generate(in).text == b.generate(in).text);
      differ += a.generate(in).text != other.generate(in).text;
    }
  }
  CHECK(differ > 0);
}

TEST_CASE("mock policy json") {
  const auto p = policy_from_json(nlohmann::json::parse(R"({"p_drift":0.3,"p_contra":0.1,"p_parse":0.05})"));
  CHECK(p.p_drift == doctest::Approx(0.3));
  CHECK(p.repair_competence == 0);
  CHECK(policy_from_json(nlohmann::json::parse(policy_to_json(p).dump())).p_contra == doctest::Approx(0.1));
  CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"p_drfit":0.3})")), ValidationError);
  CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"p_drift":1.5})")), ValidationError);
  CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"p_drift":"high"})")), ValidationError);
}

TEST_CASE("http agent request shape and bearer key") {
  FakeServer srv;
  setenv("DRIFTBENCH_TEST_KEY", "sekrit", 1);
  auto agent = agent_for(srv, "plain", "/api/");
  const auto c = agent.complete({{"system", "s"}, {"user", "u"}}, 64);
  CHECK(c.content == "{}");
  CHECK(c.finish_reason == "stop");
  REQUIRE(srv.bodies.size() == 1);
  CHECK(srv.paths[0] == "/api/v1/chat/completions");
  CHECK(srv.auth[0] == "Bearer sekrit");
  CHECK(srv.bodies[0]["temperature"] == 0);
  CHECK(srv.bodies[0]["max_tokens"] == 64);
  CHECK(srv.bodies[0]["messages"].size() == 2);
  unsetenv("DRIFTBENCH_TEST_KEY");
  agent.complete({{"user", "u"}}, 8);
  CHECK(srv.auth[1].empty());
}

TEST_CASE("http agent continues after a length stop") {
  FakeServer srv;
  const Corpus c = tiny_corpus();
  const Problem& p = c.problems.front();
  const Ledger empty(p.schema);

  auto once = agent_for(srv, "trunc-once");
  const auto r = once.generate(input_for(p, MethodKind::Direct, 1, &empty));
  CHECK(r.truncation_retries == 1);
  CHECK_FALSE(r.truncated);
  CHECK(r.text == "{\"Avery\": 1}");
  REQUIRE(srv.bodies.size() == 2);
  const auto& msgs = srv.bodies[1]["messages"];
  CHECK(msgs[msgs.size() - 2]["role"] == "assistant");
  CHECK(msgs[msgs.size() - 2]["content"] == "{\"Avery\":");
  CHECK(msgs.back()["content"] == prompt_template("truncation_retry"));

  FakeServer srv2;
  auto always = agent_for(srv2, "trunc-always");
  const auto r2 = always.generate(input_for(p, MethodKind::Direct, 1, &empty));
  CHECK(r2.truncated);
  CHECK(r2.truncation_retries == 2);
  CHECK(srv2.bodies.size() == 3);
}

TEST_CASE("http agent errors") {
  FakeServer srv;
  auto busy = agent_for(srv, "busy");
  try {
    busy.complete({{"user", "u"}}, 8);
    FAIL("expected AgentError");
  } catch (const AgentError& e) {
    CHECK(e.status() == 429);
    REQUIRE(e.retry_after().has_value());
    CHECK(*e.retry_after() == 7);
  }
  auto garbage = agent_for(srv, "garbage");
  CHECK_THROWS_AS(garbage.complete({{"user", "u"}}, 8), AgentError);

  HttpAgentConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.model = "m";
  cfg.timeout_seconds = 2;
  HttpAgent dead(cfg);
  CHECK_THROWS_AS(dead.complete({{"user", "u"}}, 8), AgentError);

  cfg.model = "";
  CHECK_THROWS_AS(HttpAgent{cfg}, ValidationError);
  cfg.model = "m";
  cfg.endpoint = "localhost:80";
  CHECK_THROWS_AS(HttpAgent{cfg}, ValidationError);
}

TEST_CASE("http agent extraction goes through the extractor prompt") {
  FakeServer srv;
  const auto seat = make_seating({"Avery", "Blake", "Casey", "Drew", "Emery", "Finley"}, TableShape::Round);
  Problem p;
  p.id = "seating_999";
  p.domain = DomainKind::Seating;
  p.schema = seat;
  p.turns.push_back(Turn{1, "Avery must sit at position 1.", {}});
  auto agent = agent_for(srv, "extractor");
  const Ledger empty(seat);
  const auto ex = agent.extract(input_for(p, MethodKind::MusRepair, 1, &empty), "{}", 0);
  REQUIRE(ex.constraints.size() == 1);
  CHECK(ex.constraints[0].type == ConstraintType::AtPosition);
  CHECK(srv.bodies[0]["messages"][0]["content"] == prompt_template("system_extraction"));
}
