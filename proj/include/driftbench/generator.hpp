#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftbench/constraint.hpp"

namespace driftbench {

enum class Split { Test, Dev };
std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct GeneratorConfig {
  std::uint64_t master_seed = 20250101;
  int count_per_domain = 10;
  std::vector<DomainKind> domains{kAllDomains.begin(), kAllDomains.end()};
  int min_turns = 4;
  int max_turns = 10;
  // P(1), P(2), P(3) new constraints in a turn
  std::vector<double> per_turn_weights = {0.5, 0.3, 0.2};
  int resample_budget = 50;
  int regeneration_retries = 20;
  double dev_fraction = 0.2;
  /// When set, test-split turn counts are nudged by +-1 (within the turn
  /// range) until they sum to this total.
  std::optional<int> test_turn_total;
  int workers = 1;

  /// 340 problems per domain, 272/68 split, 5,672 test turns.
  static GeneratorConfig full_scale(std::uint64_t seed);
};

void validate_config(const GeneratorConfig& cfg);

struct Turn {
  int turn = 1;
  std::string utterance;
  std::vector<Constraint> constraints;  // the gold constraints new at this turn
};

struct Problem {
  std::string id;
  DomainKind domain = DomainKind::LogicGrid;
  Split split = Split::Test;
  DomainSchema schema;
  std::vector<Turn> turns;

  int turn_count() const { return static_cast<int>(turns.size()); }
  /// C_{1:t}
  std::vector<Constraint> gold_prefix(int t) const;
};

struct Corpus {
  GeneratorConfig config;
  std::vector<Problem> problems;
};

/// Problem `index` of domain `d`, drawn from its own named substream and
/// targeting exactly `turns` turns. Throws ContractError once every
/// regeneration retry is spent.
Problem generate_problem(const GeneratorConfig& cfg, DomainKind d, int index, int turns);

/// Turn count and split for every problem id, before any constraint is drawn.
struct ProblemPlan {
  std::string id;
  DomainKind domain;
  int index;
  int turns;
  Split split;
};
std::vector<ProblemPlan> plan_corpus(const GeneratorConfig& cfg);

Corpus generate_corpus(const GeneratorConfig& cfg);

std::string problem_id(DomainKind d, int index);

struct DomainStats {
  DomainKind domain;
  int problems = 0;
  int test = 0;
  int dev = 0;
  double mean_turns = 0;
  int min_turns = 0;
  int max_turns = 0;
  double mean_entities = 0;
  int vocab = 0;
  double mean_final_constraints = 0;
};
std::vector<DomainStats> corpus_stats(const Corpus& c);
std::string format_stats(const std::vector<DomainStats>& stats);

nlohmann::ordered_json config_to_json(const GeneratorConfig& cfg);
GeneratorConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json problem_to_json(const Problem& p);
Problem problem_from_json(const nlohmann::json& j);

/// Header line then one problem per line; every line ends with '\n'.
void write_corpus(std::ostream& out, const Corpus& c);
std::string corpus_to_string(const Corpus& c);
/// Throws ValidationError on a missing or mismatched header.
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);
void save_corpus(const std::string& path, const Corpus& c);

}  // namespace driftbench
