#include "driftbench/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "driftbench/errors.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/solver.hpp"
#include "driftbench/utterance.hpp"

namespace driftbench {

namespace {

const std::vector<std::string> kPeople = {
    "Alice", "Avery", "Blake", "Charlie", "Diana", "Drew",  "Finley", "Frank", "Grace", "Henry", "Iris",  "Jack",
    "Karen", "Leo",   "Maya",  "Nina",    "Noah",  "Oscar", "Paul",   "Quinn", "Ruby",  "Sam",   "Tina",  "Uma",
};

const std::vector<std::string> kEvents = {
    "Audit",   "Budget", "Demo",   "Design", "Launch",   "Meeting", "Planning",
    "QA",      "Retro",  "Review", "Standup", "Sync",   "Testing", "Training",
};

const std::vector<Category> kCategories = {
    {"color", {"Red", "Blue", "Green", "Yellow"}},
    {"pet", {"Cat", "Dog", "Bird", "Fish"}},
    {"profession", {"Doctor", "Artist", "Teacher", "Chef"}},
    {"drink", {"Tea", "Coffee", "Juice", "Water"}},
    {"city", {"Paris", "Tokyo", "Lima", "Oslo"}},
    {"hobby", {"Chess", "Hiking", "Painting", "Cooking"}},
};

template <typename T>
std::vector<T> sample_without_replacement(Rng& rng, std::vector<T> pool, std::size_t n) {
  rng.shuffle(pool);
  pool.resize(n);
  return pool;
}

DomainSchema sample_schema(Rng& rng, DomainKind d) {
  switch (d) {
    case DomainKind::LogicGrid:
      return make_logic_grid(sample_without_replacement(rng, kPeople, kLogicGridEntities),
                             sample_without_replacement(rng, kCategories, kLogicGridCategories));
    case DomainKind::Scheduling: {
      const int events = rng.uniform_int(5, 7);
      return make_scheduling(sample_without_replacement(rng, kEvents, static_cast<std::size_t>(events)));
    }
    case DomainKind::Seating: {
      const int people = rng.uniform_int(6, 8);
      const bool rect = people % 2 == 0 && rng.bernoulli(0.5);
      return make_seating(sample_without_replacement(rng, kPeople, static_cast<std::size_t>(people)),
                          rect ? TableShape::Rectangular : TableShape::Round);
    }
  }
  throw ContractError("unknown domain");
}

std::vector<ConstraintType> usable_variants(const DomainSchema& s) {
  std::vector<ConstraintType> out;
  for (ConstraintType t : vocabulary(s.kind)) {
    if (t == ConstraintType::Opposite && s.seat_count() % 2 != 0) continue;
    out.push_back(t);
  }
  return out;
}

Constraint sample_constraint(Rng& rng, const DomainSchema& s, const std::vector<ConstraintType>& variants) {
  const ConstraintType type = rng.pick(variants);
  std::vector<Arg> args;
  std::vector<int> used_entities;
  int category = -1;
  for (ArgKind kind : signature(type)) {
    switch (kind) {
      case ArgKind::Entity: {
        int e;
        do e = static_cast<int>(rng.index(s.entities.size()));
        while (std::find(used_entities.begin(), used_entities.end(), e) != used_entities.end());
        used_entities.push_back(e);
        args.emplace_back(s.entities[e]);
        break;
      }
      case ArgKind::Category:
        category = static_cast<int>(rng.index(s.categories.size()));
        args.emplace_back(s.categories[category].name);
        break;
      case ArgKind::Value:
        args.emplace_back(rng.pick(s.categories.at(category).values));
        break;
      case ArgKind::Integer:
        break;
    }
  }
  switch (type) {
    case ConstraintType::AtSlot:
    case ConstraintType::NotAtSlot: args.emplace_back(rng.uniform_int(1, s.slot_count)); break;
    case ConstraintType::DurationEq: args.emplace_back(rng.uniform_int(1, s.max_duration)); break;
    case ConstraintType::StartBetween: {
      int lo = rng.uniform_int(1, s.slot_count);
      int hi = rng.uniform_int(1, s.slot_count);
      if (lo > hi) std::swap(lo, hi);
      args.emplace_back(lo);
      args.emplace_back(hi);
      break;
    }
    case ConstraintType::AtPosition:
    case ConstraintType::NotAtPosition: args.emplace_back(rng.uniform_int(1, s.seat_count())); break;
    case ConstraintType::MinSeparation: args.emplace_back(rng.uniform_int(1, seating::max_distance(s))); break;
    default: break;
  }
  return make_constraint(type, std::move(args));
}

int draw_turn_size(Rng& rng, const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  double x = rng.uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return static_cast<int>(i) + 1;
    x -= weights[i];
  }
  return static_cast<int>(weights.size());
}

// One attempt at a full trajectory; nullopt when a turn spends its budget.
std::optional<Problem> try_generate(const GeneratorConfig& cfg, DomainKind d, int index, int turns, Rng& rng) {
  Problem p;
  p.id = problem_id(d, index);
  p.domain = d;
  p.schema = sample_schema(rng, d);
  const auto variants = usable_variants(p.schema);

  std::unordered_set<CanonicalKey> seen;
  std::vector<Constraint> prefix;
  for (int t = 1; t <= turns; ++t) {
    const int size = draw_turn_size(rng, cfg.per_turn_weights);
    std::optional<std::vector<Constraint>> accepted;
    for (int attempt = 0; attempt < cfg.resample_budget && !accepted; ++attempt) {
      std::vector<Constraint> fresh;
      std::unordered_set<CanonicalKey> turn_keys;
      // fresh-key draws; the cap only matters on near-saturated schemas
      for (int draws = 0; static_cast<int>(fresh.size()) < size && draws < 200; ++draws) {
        Constraint c = sample_constraint(rng, p.schema, variants);
        const CanonicalKey key = canonicalize(c, p.schema);
        if (key.text == kTautologyKey || seen.count(key) || turn_keys.count(key)) continue;
        turn_keys.insert(key);
        c.source_turn = t;
        fresh.push_back(std::move(c));
      }
      if (static_cast<int>(fresh.size()) < size) continue;
      std::vector<Constraint> candidate = prefix;
      candidate.insert(candidate.end(), fresh.begin(), fresh.end());
      if (check_sat(p.schema, candidate).sat) {
        for (const auto& c : fresh) seen.insert(canonicalize(c, p.schema));
        prefix = std::move(candidate);
        accepted = std::move(fresh);
      }
    }
    if (!accepted) return std::nullopt;
    p.turns.push_back(Turn{t, render_utterance(*accepted, p.schema, t), std::move(*accepted)});
  }
  return p;
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::Test ? "test" : "dev"; }

Split split_from_string(std::string_view name) {
  if (name == "test") return Split::Test;
  if (name == "dev") return Split::Dev;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

GeneratorConfig GeneratorConfig::full_scale(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.master_seed = seed;
  cfg.count_per_domain = 340;
  cfg.test_turn_total = 5672;
  return cfg;
}

void validate_config(const GeneratorConfig& cfg) {
  if (cfg.count_per_domain < 0) throw ValidationError("count_per_domain must be non-negative");
  if (cfg.min_turns < 1 || cfg.min_turns > cfg.max_turns) throw ValidationError("invalid turn range");
  if (cfg.per_turn_weights.empty()) throw ValidationError("per_turn_weights must not be empty");
  for (double w : cfg.per_turn_weights) {
    if (!(w >= 0)) throw ValidationError("per_turn_weights must be non-negative");
  }
  if (cfg.resample_budget < 1 || cfg.regeneration_retries < 1) throw ValidationError("budgets must be positive");
  if (cfg.dev_fraction < 0 || cfg.dev_fraction > 1) throw ValidationError("dev_fraction must lie in [0, 1]");
  if (cfg.domains.empty()) throw ValidationError("no domains selected");
}

std::vector<Constraint> Problem::gold_prefix(int t) const {
  std::vector<Constraint> out;
  for (int i = 0; i < t && i < turn_count(); ++i) {
    out.insert(out.end(), turns[i].constraints.begin(), turns[i].constraints.end());
  }
  return out;
}

std::string problem_id(DomainKind d, int index) {
  std::ostringstream out;
  out << to_string(d) << '_' << std::setw(3) << std::setfill('0') << index;
  return out.str();
}

Problem generate_problem(const GeneratorConfig& cfg, DomainKind d, int index, int turns) {
  for (int attempt = 0; attempt < cfg.regeneration_retries; ++attempt) {
    Rng rng(derive_seed(cfg.master_seed, "problem/" + problem_id(d, index) + "/" + std::to_string(attempt)));
    if (auto p = try_generate(cfg, d, index, turns, rng)) return std::move(*p);
  }
  throw ContractError("problem " + problem_id(d, index) + " exhausted " + std::to_string(cfg.regeneration_retries) +
                      " regeneration retries");
}

std::vector<ProblemPlan> plan_corpus(const GeneratorConfig& cfg) {
  validate_config(cfg);
  std::vector<ProblemPlan> plans;
  for (DomainKind d : cfg.domains) {
    const std::size_t first = plans.size();
    for (int i = 0; i < cfg.count_per_domain; ++i) {
      const std::string id = problem_id(d, i);
      Rng rng(derive_seed(cfg.master_seed, "turns/" + id));
      plans.push_back({id, d, i, rng.uniform_int(cfg.min_turns, cfg.max_turns), Split::Test});
    }
    // lowest-ranked ids by seeded hash form the dev split
    std::vector<std::size_t> order(plans.size() - first);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = first + k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return derive_seed(cfg.master_seed, "split/" + plans[a].id) < derive_seed(cfg.master_seed, "split/" + plans[b].id);
    });
    const auto dev = static_cast<std::size_t>(std::llround(cfg.dev_fraction * static_cast<double>(order.size())));
    for (std::size_t k = 0; k < dev; ++k) plans[order[k]].split = Split::Dev;
  }

  if (cfg.test_turn_total) {
    std::vector<std::size_t> test;
    long sum = 0;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      if (plans[i].split == Split::Test) {
        test.push_back(i);
        sum += plans[i].turns;
      }
    }
    std::sort(test.begin(), test.end(), [&](std::size_t a, std::size_t b) {
      return derive_seed(cfg.master_seed, "adjust/" + plans[a].id) < derive_seed(cfg.master_seed, "adjust/" + plans[b].id);
    });
    long diff = *cfg.test_turn_total - sum;
    while (diff != 0) {
      bool moved = false;
      for (std::size_t i : test) {
        if (diff == 0) break;
        int& turns = plans[i].turns;
        if (diff > 0 && turns < cfg.max_turns) {
          ++turns;
          --diff;
          moved = true;
        } else if (diff < 0 && turns > cfg.min_turns) {
          --turns;
          ++diff;
          moved = true;
        }
      }
      if (!moved) throw ValidationError("test_turn_total is unreachable within the turn range");
    }
  }
  return plans;
}

Corpus generate_corpus(const GeneratorConfig& cfg) {
  const auto plans = plan_corpus(cfg);
  Corpus corpus{cfg, std::vector<Problem>(plans.size())};
  parallel_for(plans.size(), cfg.workers, [&](std::size_t i) {
    const auto& plan = plans[i];
    Problem p = generate_problem(cfg, plan.domain, plan.index, plan.turns);
    p.split = plan.split;
    corpus.problems[i] = std::move(p);
  });
  return corpus;
}

std::vector<DomainStats> corpus_stats(const Corpus& c) {
  std::vector<DomainStats> out;
  for (DomainKind d : kAllDomains) {
    DomainStats st{d};
    st.vocab = static_cast<int>(vocabulary(d).size());
    double turns = 0, entities = 0, final_constraints = 0;
    for (const auto& p : c.problems) {
      if (p.domain != d) continue;
      ++st.problems;
      (p.split == Split::Test ? st.test : st.dev)++;
      turns += p.turn_count();
      entities += p.schema.entity_count();
      final_constraints += static_cast<double>(p.gold_prefix(p.turn_count()).size());
      st.min_turns = st.problems == 1 ? p.turn_count() : std::min(st.min_turns, p.turn_count());
      st.max_turns = std::max(st.max_turns, p.turn_count());
    }
    if (st.problems == 0) continue;
    st.mean_turns = turns / st.problems;
    st.mean_entities = entities / st.problems;
    st.mean_final_constraints = final_constraints / st.problems;
    out.push_back(st);
  }
  return out;
}

std::string format_stats(const std::vector<DomainStats>& stats) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "| Domain | Split (test/dev/all) | Turns [min,max] | Ent. | Vocab | Final |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& s : stats) {
    out << "| " << to_string(s.domain) << " | " << s.test << '/' << s.dev << '/' << s.problems << " | "
        << s.mean_turns << " [" << s.min_turns << ',' << s.max_turns << "] | " << s.mean_entities << " | "
        << s.vocab << " | " << s.mean_final_constraints << " |\n";
  }
  return out.str();
}

nlohmann::ordered_json config_to_json(const GeneratorConfig& cfg) {
  nlohmann::ordered_json j;
  j["master_seed"] = cfg.master_seed;
  j["count_per_domain"] = cfg.count_per_domain;
  auto domains = nlohmann::ordered_json::array();
  for (DomainKind d : cfg.domains) domains.push_back(std::string(to_string(d)));
  j["domains"] = domains;
  j["min_turns"] = cfg.min_turns;
  j["max_turns"] = cfg.max_turns;
  j["per_turn_weights"] = cfg.per_turn_weights;
  j["resample_budget"] = cfg.resample_budget;
  j["regeneration_retries"] = cfg.regeneration_retries;
  j["dev_fraction"] = cfg.dev_fraction;
  j["test_turn_total"] = cfg.test_turn_total ? nlohmann::ordered_json(*cfg.test_turn_total) : nlohmann::ordered_json();
  return j;
}

GeneratorConfig config_from_json(const nlohmann::json& j) {
  GeneratorConfig cfg;
  try {
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.count_per_domain = j.at("count_per_domain").get<int>();
    cfg.domains.clear();
    for (const auto& d : j.at("domains")) cfg.domains.push_back(domain_from_string(d.get<std::string>()));
    cfg.min_turns = j.at("min_turns").get<int>();
    cfg.max_turns = j.at("max_turns").get<int>();
    cfg.per_turn_weights = j.at("per_turn_weights").get<std::vector<double>>();
    cfg.resample_budget = j.at("resample_budget").get<int>();
    cfg.regeneration_retries = j.at("regeneration_retries").get<int>();
    cfg.dev_fraction = j.at("dev_fraction").get<double>();
    if (j.contains("test_turn_total") && !j["test_turn_total"].is_null()) {
      cfg.test_turn_total = j["test_turn_total"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed generator config: ") + e.what());
  }
  return cfg;
}

nlohmann::ordered_json problem_to_json(const Problem& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["domain"] = std::string(to_string(p.domain));
  j["split"] = std::string(to_string(p.split));
  j["schema"] = schema_to_json(p.schema);
  auto turns = nlohmann::ordered_json::array();
  for (const auto& t : p.turns) {
    nlohmann::ordered_json tj;
    tj["turn"] = t.turn;
    tj["utterance"] = t.utterance;
    auto cs = nlohmann::ordered_json::array();
    for (const auto& c : t.constraints) cs.push_back(constraint_to_json(c));
    tj["constraints"] = cs;
    turns.push_back(tj);
  }
  j["turns"] = turns;
  return j;
}

Problem problem_from_json(const nlohmann::json& j) {
  Problem p;
  try {
    p.id = j.at("id").get<std::string>();
    p.domain = domain_from_string(j.at("domain").get<std::string>());
    p.split = split_from_string(j.at("split").get<std::string>());
    p.schema = schema_from_json(j.at("schema"));
    for (const auto& tj : j.at("turns")) {
      Turn t;
      t.turn = tj.at("turn").get<int>();
      t.utterance = tj.at("utterance").get<std::string>();
      for (const auto& cj : tj.at("constraints")) t.constraints.push_back(constraint_from_json(cj));
      p.turns.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed problem: ") + e.what());
  }
  if (p.schema.kind != p.domain) throw ValidationError("problem " + p.id + ": schema kind does not match domain");
  return p;
}

void write_corpus(std::ostream& out, const Corpus& c) {
  nlohmann::ordered_json header;
  header["format"] = "driftbench-corpus";
  header["version"] = 1;
  header["config"] = config_to_json(c.config);
  out << header.dump() << '\n';
  for (const auto& p : c.problems) out << problem_to_json(p).dump() << '\n';
}

std::string corpus_to_string(const Corpus& c) {
  std::ostringstream out;
  write_corpus(out, c);
  return out.str();
}

Corpus read_corpus(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("corpus is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corpus header is not JSON: ") + e.what());
  }
  if (header.value("format", "") != "driftbench-corpus" || header.value("version", 0) != 1) {
    throw ValidationError("not a version-1 driftbench corpus");
  }
  Corpus c;
  if (header.contains("config")) c.config = config_from_json(header["config"]);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      c.problems.push_back(problem_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("corpus line is not JSON: ") + e.what());
    }
  }
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus " + path);
  return read_corpus(in);
}

void save_corpus(const std::string& path, const Corpus& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write corpus " + path);
  write_corpus(out, c);
}

}  // namespace driftbench
