// driftbench: generate corpora, run agents over them, analyze traces, replay fixtures.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driftbench/agents.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/fixtures.hpp"
#include "driftbench/generator.hpp"
#include "driftbench/harness.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/parallel.hpp"

namespace fs = std::filesystem;
using namespace driftbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kMethodNames = {"direct", "cot", "ledger_only", "mus_repair"};
const std::vector<std::string> kDomainNames = {"logic_grid", "scheduling", "seating"};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- generate ----

struct GenerateOpts {
  std::uint64_t seed = GeneratorConfig{}.master_seed;
  int count_per_domain = GeneratorConfig{}.count_per_domain;
  std::vector<std::string> domains = kDomainNames;
  std::string out;
  bool full_scale = false;
  int workers = default_workers();
};

int cmd_generate(const GenerateOpts& o) {
  GeneratorConfig cfg = o.full_scale ? GeneratorConfig::full_scale(o.seed) : GeneratorConfig{};
  cfg.master_seed = o.seed;
  if (!o.full_scale) cfg.count_per_domain = o.count_per_domain;
  cfg.domains.clear();
  for (const auto& d : o.domains) cfg.domains.push_back(domain_from_string(d));
  cfg.workers = o.workers;
  try {
    validate_config(cfg);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const Corpus corpus = generate_corpus(cfg);
  save_corpus(o.out, corpus);
  int test = 0, test_turns = 0;
  for (const auto& p : corpus.problems) {
    if (p.split == Split::Test) {
      ++test;
      test_turns += p.turn_count();
    }
  }
  std::cout << format_stats(corpus_stats(corpus));
  std::cout << "wrote " << corpus.problems.size() << " problems (" << test << " test, "
            << corpus.problems.size() - test << " dev; " << test_turns << " test turns) to " << o.out << "\n";
  return kExitOk;
}

// ---- run ----

struct RunOpts {
  std::string corpus;
  std::string split = "test";
  std::vector<std::string> methods = kMethodNames;
  std::string agent = "mock";
  std::string agent_id;
  std::string mock_policy;
  std::string endpoint = HttpAgentConfig{}.endpoint;
  std::string model;
  int max_tokens = HttpAgentConfig{}.max_tokens;
  int max_in_flight = HttpAgentConfig{}.max_in_flight;
  int timeout = HttpAgentConfig{}.timeout_seconds;
  int k = RunConfig{}.k;
  int truncation_retries = RunConfig{}.truncation_retries;
  int ledger_budget = kDefaultLedgerBudgetTokens;
  int workers = default_workers();
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_run(const RunOpts& o) {
  const Corpus corpus = load_corpus(o.corpus);
  std::vector<const Problem*> problems;
  for (const auto& p : corpus.problems) {
    if (o.split == "all" || to_string(p.split) == o.split) problems.push_back(&p);
  }

  RunConfig cfg;
  cfg.k = o.k;
  cfg.truncation_retries = o.truncation_retries;
  cfg.ledger_budget_tokens = o.ledger_budget;
  cfg.workers = o.workers;
  cfg.seed = o.seed;
  cfg.methods.clear();
  for (const auto& m : o.methods) cfg.methods.push_back(method_from_string(m));

  nlohmann::ordered_json agent_echo;
  std::unique_ptr<Agent> agent;
  if (o.agent == "mock") {
    MockPolicy policy = MockPolicy::oracle();
    if (!o.mock_policy.empty()) {
      try {
        policy = policy_from_json(nlohmann::json::parse(read_file(o.mock_policy)));
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("mock policy " + o.mock_policy + ": " + e.what());
      } catch (const ValidationError& e) {
        throw UsageError("mock policy " + o.mock_policy + ": " + e.what());
      }
    }
    agent = std::make_unique<MockAgent>(policy, o.seed, o.agent_id.empty() ? "mock" : o.agent_id);
    agent_echo = {{"kind", "mock"}, {"id", agent->id()}, {"policy", policy_to_json(policy)}};
  } else {
    if (o.model.empty()) throw UsageError("--agent http needs --model");
    HttpAgentConfig hc;
    hc.endpoint = o.endpoint;
    hc.model = o.model;
    hc.id = o.agent_id;
    hc.max_tokens = o.max_tokens;
    hc.truncation_retries = o.truncation_retries;
    hc.max_in_flight = o.max_in_flight;
    hc.timeout_seconds = o.timeout;
    try {
      agent = std::make_unique<HttpAgent>(hc);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    agent_echo = {{"kind", "http"}, {"id", agent->id()}, {"endpoint", hc.endpoint}, {"model", hc.model},
                  {"max_tokens", hc.max_tokens}};
  }
  cfg.echo = {{"corpus_config", config_to_json(corpus.config)},
              {"split", o.split},
              {"problems", problems.size()},
              {"agents", nlohmann::ordered_json::array({agent_echo})}};

  const std::vector<TraceRow> rows = run_corpus(problems, {agent.get()}, cfg);
  write_file(o.out, trace_to_string(cfg, rows));

  auto errored = nlohmann::ordered_json::array();
  int correct = 0;
  for (const auto& r : rows) {
    correct += r.answer_correct;
    if (r.error) {
      errored.push_back({{"agent", r.agent},
                         {"method", to_string(r.method)},
                         {"problem_id", r.problem_id},
                         {"turn", r.turn},
                         {"error", *r.error}});
    }
  }
  std::cout << "wrote " << rows.size() << " rows to " << o.out << " (config " << config_hash(cfg) << ", "
            << correct << " correct)\n";
  const fs::path manifest = o.out + ".errors.json";
  if (!errored.empty()) {
    write_file(manifest, errored.dump(2) + "\n");
    std::cerr << errored.size() << " rows errored; see " << manifest.string() << "\n";
    return kExitFailure;
  }
  std::error_code ec;
  fs::remove(manifest, ec);
  return kExitOk;
}

// ---- analyze ----

struct AnalyzeOpts {
  std::vector<std::string> traces;
  std::string baseline = "direct";
  std::string out_dir = "report";
  int resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  bool selftest = false;
};

int analyze_selftest() {
  const std::vector<double> p = {0.01, 0.02, 0.04};
  const std::vector<double> want = {0.03, 0.03, 0.04};
  const auto q = bh_correct(p);
  bool ok = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool hit = std::abs(q[i] - want[i]) < 1e-12;
    ok = ok && hit;
    std::cout << "bh p=" << format_fixed(p[i], 2) << " q=" << format_fixed(q[i], 4) << " expected "
              << format_fixed(want[i], 2) << (hit ? " ok" : " MISMATCH") << "\n";
  }
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  return ok ? kExitOk : kExitFailure;
}

Table overlap_table(const std::vector<TraceRow>& rows) {
  Table t{"Overlap of mus_repair error rows",
          {"agent_a", "agent_b", "errors_a", "errors_b", "overlap", "jaccard", "share_a", "share_b"}};
  std::map<std::string, std::vector<TraceRow>> mus;
  for (const auto& r : rows) {
    if (r.method == MethodKind::MusRepair) mus[r.agent].push_back(r);
  }
  for (auto a = mus.begin(); a != mus.end(); ++a) {
    for (auto b = std::next(a); b != mus.end(); ++b) {
      const OverlapResult o = residual_overlap(a->second, b->second);
      t.rows.push_back({a->first, b->first, std::to_string(o.errors_a), std::to_string(o.errors_b),
                        std::to_string(o.overlap), format_fixed(o.jaccard(), 3), format_fixed(o.share_a(), 3),
                        format_fixed(o.share_b(), 3)});
    }
  }
  if (mus.size() < 2) t.notes.push_back("needs mus_repair rows from at least two agents");
  return t;
}

int cmd_analyze(const AnalyzeOpts& o) {
  if (o.selftest) return analyze_selftest();
  if (o.traces.empty()) throw UsageError("analyze needs at least one --traces");

  std::vector<TraceRow> rows;
  auto inputs = nlohmann::ordered_json::array();
  std::set<std::string> seen_agents;
  for (const auto& spec : o.traces) {
    const auto eq = spec.find('=');
    const std::string label = eq == std::string::npos ? "" : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    Trace trace = load_trace(path);
    std::set<std::string> agents;
    for (const auto& r : trace.rows) agents.insert(r.agent);
    for (auto& r : trace.rows) {
      if (!label.empty()) r.agent = agents.size() == 1 ? label : label + ":" + r.agent;
    }
    std::set<std::string> relabeled;
    for (const auto& r : trace.rows) relabeled.insert(r.agent);
    for (const auto& a : relabeled) {
      if (!seen_agents.insert(a).second) throw UsageError("agent label '" + a + "' appears in two trace files");
    }
    inputs.push_back({{"label", label}, {"path", path}, {"rows", trace.rows.size()}, {"header", trace.header}});
    rows.insert(rows.end(), std::make_move_iterator(trace.rows.begin()), std::make_move_iterator(trace.rows.end()));
  }

  const MethodKind baseline = method_from_string(o.baseline);
  std::vector<std::pair<std::string, Table>> tables = {
      {"accuracy_by_method", accuracy_table(rows, {GroupKey::Agent, GroupKey::Method})},
      {"accuracy_by_domain", accuracy_table(rows, {GroupKey::Agent, GroupKey::Method, GroupKey::Domain})},
      {"accuracy_by_turn", accuracy_table(rows, {GroupKey::Agent, GroupKey::Method, GroupKey::Turn})},
      {"retention", retention_table(rows)},
      {"lift", lift_table(rows)},
      {"residuals", residual_table(rows)},
      {"triggers", trigger_counts_table(rows)},
      {"inference", inference_table(infer(rows, baseline, o.resamples, o.seed))},
      {"overlap", overlap_table(rows)},
      {"truncation", truncation_table(rows)},
  };

  nlohmann::ordered_json report;
  report["format"] = "driftbench-report";
  report["version"] = 1;
  report["inputs"] = inputs;
  report["baseline_method"] = o.baseline;
  report["resamples"] = o.resamples;
  report["seed"] = o.seed;
  auto& out_tables = report["tables"] = nlohmann::ordered_json::object();
  const fs::path dir(o.out_dir);
  for (const auto& [name, table] : tables) {
    write_file(dir / (name + ".csv"), table.to_csv());
    write_file(dir / (name + ".md"), table.to_markdown());
    out_tables[name] = table.to_json();
  }
  write_file(dir / "report.json", report.dump(2) + "\n");

  std::cout << tables[0].second.to_markdown() << "\n" << tables[5].second.to_markdown();
  std::cout << "wrote " << tables.size() << " tables to " << dir.string() << "\n";
  return kExitOk;
}

// ---- fixtures ----

struct FixtureOpts {
  std::vector<std::string> files;
  bool verbose = false;
};

int cmd_fixtures(const FixtureOpts& o) {
  std::vector<FixtureCase> cases;
  if (o.files.empty()) {
    cases = builtin_fixtures();
  } else {
    for (const auto& f : o.files) cases.push_back(fixture_from_json(nlohmann::json::parse(read_file(f))));
  }
  int mismatches = 0;
  for (const auto& fc : cases) {
    std::map<MethodKind, std::pair<int, int>> tally;
    for (const auto& m : replay_fixture(fc)) {
      auto& t = tally[m.method];
      t.first += m.actual;
      ++t.second;
      const bool ok = m.actual == m.expected;
      if (!ok) ++mismatches;
      if (!ok || o.verbose) {
        std::cout << (ok ? "  " : "  MISMATCH ") << fc.id << " turn " << m.turn << " " << to_string(m.method)
                  << ": expected " << (m.expected ? "correct" : "wrong") << ", got "
                  << (m.actual ? "correct" : "wrong");
        for (TriggerCode c : m.triggers) std::cout << " [" << to_string(c) << "]";
        std::cout << "\n";
      }
    }
    std::cout << fc.id << ":";
    for (const auto& [method, t] : tally) std::cout << " " << to_string(method) << " " << t.first << "/" << t.second;
    std::cout << "\n";
  }
  std::cout << (mismatches ? std::to_string(mismatches) + " cells mismatched" : "all cells match") << "\n";
  return mismatches ? kExitFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-turn constraint drift benchmark"};
  app.set_config("--config", "", "key = value config file; flags override it");
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Generate a seeded problem corpus");
  g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  g->add_option("--count-per-domain", gen.count_per_domain, "Problems per domain")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  g->add_option("--domains", gen.domains, "Comma-separated domains")
      ->delimiter(',')
      ->check(CLI::IsMember(kDomainNames));
  g->add_option("--out", gen.out, "Corpus JSONL path")->required();
  g->add_flag("--full-scale", gen.full_scale, "340 problems per domain, 5,672 test turns");
  g->add_option("--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);

  RunOpts run;
  auto* r = app.add_subcommand("run", "Run an agent over a corpus and write a trace");
  r->add_option("--corpus", run.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  r->add_option("--split", run.split, "test, dev or all")
      ->check(CLI::IsMember({"test", "dev", "all"}))
      ->capture_default_str();
  r->add_option("--methods", run.methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames));
  r->add_option("--agent", run.agent, "mock or http")->check(CLI::IsMember({"mock", "http"}))->capture_default_str();
  r->add_option("--agent-id", run.agent_id, "Agent label recorded in rows");
  r->add_option("--mock-policy", run.mock_policy, "Mock policy JSON")->check(CLI::ExistingFile);
  r->add_option("--endpoint", run.endpoint, "OpenAI-compatible server base URL")->capture_default_str();
  r->add_option("--model", run.model, "Model name for --agent http");
  r->add_option("--max-tokens", run.max_tokens, "Completion token cap")->check(CLI::PositiveNumber);
  r->add_option("--max-in-flight", run.max_in_flight, "Concurrent HTTP requests")->check(CLI::PositiveNumber);
  r->add_option("--timeout", run.timeout, "HTTP timeout in seconds")->check(CLI::PositiveNumber);
  r->add_option("--k", run.k, "Repair attempts")->check(CLI::NonNegativeNumber)->capture_default_str();
  r->add_option("--truncation-retries", run.truncation_retries, "Continuations after a length stop")
      ->check(CLI::NonNegativeNumber);
  r->add_option("--ledger-budget", run.ledger_budget, "Ledger prompt budget in tokens")->check(CLI::PositiveNumber);
  r->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);
  r->add_option("--seed", run.seed, "Run seed")->capture_default_str();
  r->add_option("--out", run.out, "Trace JSONL path")->required();

  AnalyzeOpts an;
  auto* a = app.add_subcommand("analyze", "Compute report tables from traces");
  a->add_option("--traces", an.traces, "[label=]trace.jsonl, repeatable");
  a->add_option("--baseline-method", an.baseline, "Method the others are tested against")
      ->check(CLI::IsMember(kMethodNames))
      ->capture_default_str();
  a->add_option("--out-dir", an.out_dir, "Output directory")->capture_default_str();
  a->add_option("--resamples", an.resamples, "Bootstrap and permutation replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  a->add_option("--seed", an.seed, "Resampling seed")->capture_default_str();
  a->add_flag("--selftest", an.selftest, "Check the BH worked example and exit");

  FixtureOpts fx;
  auto* f = app.add_subcommand("fixtures", "Replay the transcript fixtures");
  f->add_option("--file", fx.files, "Fixture JSON instead of the built-in set")->check(CLI::ExistingFile);
  f->add_flag("-v,--verbose", fx.verbose, "Print every cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_run(run);
    if (*a) return cmd_analyze(an);
    if (*f) return cmd_fixtures(fx);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
