#include "driftbench/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace {

constexpr std::string_view kGroupNames[] = {"agent", "method", "domain", "turn"};

std::string group_value(const TraceRow& r, GroupKey k) {
  switch (k) {
    case GroupKey::Agent: return r.agent;
    case GroupKey::Method: return std::string(to_string(r.method));
    case GroupKey::Domain: return std::string(to_string(r.domain));
    case GroupKey::Turn: {
      // zero-padded so lexical order is numeric order
      std::ostringstream out;
      out << std::setw(2) << std::setfill('0') << r.turn;
      return out.str();
    }
  }
  return {};
}

using AgentMethod = std::pair<std::string, MethodKind>;

std::map<AgentMethod, std::vector<const TraceRow*>> by_agent_method(const std::vector<TraceRow>& rows) {
  std::map<AgentMethod, std::vector<const TraceRow*>> out;
  for (const auto& r : rows) out[{r.agent, r.method}].push_back(&r);
  return out;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::string pct(double fraction) { return format_fixed(100.0 * fraction, 1); }

}  // namespace

std::string format_fixed(double v, int decimals) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(decimals) << v;
  return out.str();
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_escape(columns[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(row[i]);
    out += '\n';
  }
  return out;
}

std::string Table::to_markdown() const {
  std::string out = "## " + title + "\n\n|";
  for (const auto& c : columns) out += " " + c + " |";
  out += "\n|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& row : rows) {
    out += '|';
    for (const auto& cell : row) out += " " + cell + " |";
    out += '\n';
  }
  for (const auto& n : notes) out += "\n_" + n + "_\n";
  return out;
}

nlohmann::ordered_json Table::to_json() const {
  nlohmann::ordered_json j;
  j["title"] = title;
  j["columns"] = columns;
  j["rows"] = rows;
  j["notes"] = notes;
  return j;
}

std::string_view to_string(GroupKey key) { return kGroupNames[static_cast<int>(key)]; }

GroupKey group_key_from_string(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kGroupNames[i] == name) return static_cast<GroupKey>(i);
  }
  throw ValidationError("unknown grouping key '" + std::string(name) + "'");
}

std::vector<AccuracyCell> turn_accuracy(const std::vector<TraceRow>& rows, const std::vector<GroupKey>& keys) {
  std::map<std::vector<std::string>, AccuracyCell> cells;
  for (const auto& r : rows) {
    std::vector<std::string> g;
    for (GroupKey k : keys) g.push_back(group_value(r, k));
    auto& cell = cells[g];
    cell.group = g;
    ++cell.n;
    cell.correct += r.answer_correct ? 1 : 0;
  }
  std::vector<AccuracyCell> out;
  for (auto& [g, cell] : cells) out.push_back(std::move(cell));
  return out;
}

Table accuracy_table(const std::vector<TraceRow>& rows, const std::vector<GroupKey>& keys) {
  Table t;
  t.title = "Turn accuracy";
  for (GroupKey k : keys) t.columns.emplace_back(to_string(k));
  t.columns.insert(t.columns.end(), {"n", "correct", "accuracy_pct"});
  for (const auto& c : turn_accuracy(rows, keys)) {
    auto row = c.group;
    row.insert(row.end(), {std::to_string(c.n), std::to_string(c.correct), pct(c.accuracy())});
    t.rows.push_back(std::move(row));
  }
  if (rows.empty()) t.notes.push_back("no rows");
  return t;
}

std::vector<RetentionCell> retention(const std::vector<TraceRow>& rows) {
  std::vector<RetentionCell> out;
  for (const auto& [key, group] : by_agent_method(rows)) {
    RetentionCell cell{key.first, std::string(to_string(key.second))};
    int n1 = 0, c1 = 0, n10 = 0, c10 = 0;
    for (const TraceRow* r : group) {
      if (r->turn == 1) {
        ++n1;
        c1 += r->answer_correct;
      } else if (r->turn == 10) {
        ++n10;
        c10 += r->answer_correct;
      }
    }
    if (n1) cell.turn1 = static_cast<double>(c1) / n1;
    if (n10) cell.turn10 = static_cast<double>(c10) / n10;
    if (cell.turn1 && cell.turn10 && *cell.turn1 > 0) cell.retain_pct = 100.0 * *cell.turn10 / *cell.turn1;
    out.push_back(cell);
  }
  return out;
}

Table retention_table(const std::vector<TraceRow>& rows) {
  Table t{"Retention (turn-10 / turn-1 accuracy)", {"agent", "method", "turn1_pct", "turn10_pct", "retain_pct"}};
  for (const auto& c : retention(rows)) {
    t.rows.push_back({c.agent, c.method, c.turn1 ? pct(*c.turn1) : "n/a", c.turn10 ? pct(*c.turn10) : "n/a",
                      c.retain_pct ? format_fixed(*c.retain_pct, 1) : "unavailable"});
  }
  return t;
}

double relative_lift(double direct, double cot, double ledger_only, double mus_repair) {
  const double best = std::max({direct, cot, ledger_only});
  if (best <= 0) throw ValidationError("relative lift needs a positive baseline accuracy");
  return (mus_repair - best) / best;
}

Table lift_table(const std::vector<TraceRow>& rows) {
  Table t{"Relative lift of mus_repair", {"agent", "direct_pct", "cot_pct", "ledger_only_pct", "mus_repair_pct", "lift_pct"}};
  std::map<std::string, std::map<MethodKind, std::pair<int, int>>> acc;
  for (const auto& r : rows) {
    auto& a = acc[r.agent][r.method];
    a.first += r.answer_correct;
    ++a.second;
  }
  for (const auto& [agent, methods] : acc) {
    if (methods.size() != 4) {
      t.notes.push_back(agent + ": lift needs all four methods");
      continue;
    }
    std::array<double, 4> v{};
    for (const auto& [m, a] : methods) v[static_cast<int>(m)] = static_cast<double>(a.first) / a.second;
    std::string lift = "n/a";
    if (std::max({v[0], v[1], v[2]}) > 0) lift = format_fixed(100.0 * relative_lift(v[0], v[1], v[2], v[3]), 1);
    t.rows.push_back({agent, pct(v[0]), pct(v[1]), pct(v[2]), pct(v[3]), lift});
  }
  return t;
}

std::vector<ResidualCell> decompose_residuals(const std::vector<TraceRow>& rows) {
  std::vector<ResidualCell> out;
  for (const auto& [key, group] : by_agent_method(rows)) {
    ResidualCell cell{key.first, std::string(to_string(key.second))};
    for (const TraceRow* r : group) {
      if (r->answer_correct) continue;
      if (!r->z3_sat) {
        ++cell.contradiction;
      } else if (std::find(r->triggers.begin(), r->triggers.end(), TriggerCode::AnswerLedgerConflict) !=
                 r->triggers.end()) {
        ++cell.drift;
      } else {
        ++cell.other;
      }
    }
    out.push_back(cell);
  }
  return out;
}

Table residual_table(const std::vector<TraceRow>& rows) {
  Table t{"Residual error decomposition",
          {"agent", "method", "residuals", "drift", "contradiction", "other", "drift_pct", "contradiction_pct",
           "other_pct"}};
  for (const auto& c : decompose_residuals(rows)) {
    if (c.total() == 0) {
      t.notes.push_back(c.agent + "/" + c.method + ": no residual errors");
      t.rows.push_back({c.agent, c.method, "0", "0", "0", "0", "n/a", "n/a", "n/a"});
      continue;
    }
    t.rows.push_back({c.agent, c.method, std::to_string(c.total()), std::to_string(c.drift),
                      std::to_string(c.contradiction), std::to_string(c.other), format_fixed(c.share(c.drift), 1),
                      format_fixed(c.share(c.contradiction), 1), format_fixed(c.share(c.other), 1)});
  }
  return t;
}

std::vector<TriggerCell> trigger_table(const std::vector<TraceRow>& rows) {
  std::vector<TriggerCell> out;
  for (const auto& [key, group] : by_agent_method(rows)) {
    for (TriggerCode code : kAllTriggers) {
      TriggerCell cell{key.first, std::string(to_string(key.second)), code};
      int correct = 0, sat = 0;
      for (const TraceRow* r : group) {
        for (const auto& a : r->attempt_records) cell.events += std::count(a.triggers.begin(), a.triggers.end(), code);
        const auto& first = r->attempt_records.empty() ? r->triggers : r->attempt_records.front().triggers;
        if (std::find(first.begin(), first.end(), code) == first.end()) continue;
        ++cell.initial_rows;
        correct += r->answer_correct;
        sat += r->z3_sat;
      }
      if (cell.initial_rows) {
        cell.post_repair_accuracy = static_cast<double>(correct) / cell.initial_rows;
        cell.post_repair_sat = static_cast<double>(sat) / cell.initial_rows;
      }
      out.push_back(cell);
    }
  }
  return out;
}

Table trigger_counts_table(const std::vector<TraceRow>& rows) {
  Table t{"Trigger events and post-repair outcomes",
          {"agent", "method", "trigger", "events", "initial_rows", "post_repair_accuracy_pct", "post_repair_sat_pct"}};
  for (const auto& c : trigger_table(rows)) {
    const bool any = c.initial_rows > 0;
    t.rows.push_back({c.agent, c.method, std::string(to_string(c.trigger)), std::to_string(c.events),
                      std::to_string(c.initial_rows), any ? pct(c.post_repair_accuracy) : "n/a",
                      any ? pct(c.post_repair_sat) : "n/a"});
  }
  t.notes.push_back("events count every attempt record; outcomes group rows by the first verification's triggers");
  return t;
}

Pairing pair_by_problem(const std::vector<TraceRow>& rows, const std::string& agent, MethodKind a, MethodKind b) {
  std::map<std::string, std::pair<int, int>> acc_a, acc_b;
  for (const auto& r : rows) {
    if (r.agent != agent) continue;
    auto* target = r.method == a ? &acc_a : r.method == b ? &acc_b : nullptr;
    if (!target) continue;
    auto& cell = (*target)[r.problem_id];
    cell.first += r.answer_correct;
    ++cell.second;
  }
  Pairing out;
  for (const auto& [id, ca] : acc_a) {
    const auto it = acc_b.find(id);
    if (it == acc_b.end()) {
      ++out.excluded;
      continue;
    }
    PairedDelta d{id, static_cast<double>(ca.first) / ca.second,
                  static_cast<double>(it->second.first) / it->second.second};
    d.delta = d.accuracy_a - d.accuracy_b;
    out.deltas.push_back(d);
  }
  for (const auto& [id, cb] : acc_b) {
    if (!acc_a.count(id)) ++out.excluded;
  }
  return out;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& deltas, int resamples, std::uint64_t seed,
                                       double level) {
  if (deltas.size() < 2) throw ValidationError("bootstrap needs at least two paired deltas");
  if (resamples < 1) throw ValidationError("bootstrap needs at least one resample");
  Rng rng(seed);
  const std::size_t n = deltas.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += deltas[rng.index(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  return {quantile(means, alpha / 2), quantile(means, 1 - alpha / 2)};
}

double sign_permutation_test(const std::vector<double>& deltas, int resamples, std::uint64_t seed) {
  if (deltas.size() < 2) throw ValidationError("sign-permutation test needs at least two paired deltas");
  if (resamples < 1) throw ValidationError("sign-permutation test needs at least one resample");
  const double observed = std::fabs(mean_of(deltas));
  const double tolerance = 1e-12 * std::max(1.0, observed);
  Rng rng(seed);
  int extreme = 0;
  for (int r = 0; r < resamples; ++r) {
    double sum = 0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (i % 64 == 0) bits = rng.next();
      sum += (bits & 1) ? deltas[i] : -deltas[i];
      bits >>= 1;
    }
    if (std::fabs(sum / static_cast<double>(deltas.size())) >= observed - tolerance) ++extreme;
  }
  return (1.0 + extreme) / (1.0 + resamples);
}

std::vector<double> bh_correct(const std::vector<double>& p) {
  const std::size_t m = p.size();
  for (double v : p) {
    if (!(v >= 0 && v <= 1)) throw ValidationError("p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const std::size_t i = order[rank - 1];
    running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(rank));
    q[i] = running;
  }
  return q;
}

std::vector<InferenceResult> infer(const std::vector<TraceRow>& rows, MethodKind baseline, int resamples,
                                   std::uint64_t seed) {
  std::set<std::string> agents;
  std::set<MethodKind> methods;
  for (const auto& r : rows) {
    agents.insert(r.agent);
    methods.insert(r.method);
  }
  std::vector<InferenceResult> out;
  if (!methods.count(baseline)) return out;
  for (const auto& agent : agents) {
    for (MethodKind m : methods) {
      if (m == baseline) continue;
      const Pairing pairing = pair_by_problem(rows, agent, m, baseline);
      InferenceResult res{agent, m, baseline, static_cast<int>(pairing.deltas.size()), pairing.excluded};
      if (pairing.deltas.size() < 2) continue;
      std::vector<double> d;
      for (const auto& pd : pairing.deltas) d.push_back(pd.delta);
      const std::string label = agent + "/" + std::string(to_string(m));
      res.delta_pp = 100.0 * mean_of(d);
      const auto [lo, hi] = bootstrap_ci(d, resamples, derive_seed(seed, "bootstrap/" + label));
      res.lo_pp = 100.0 * lo;
      res.hi_pp = 100.0 * hi;
      res.p = sign_permutation_test(d, resamples, derive_seed(seed, "permutation/" + label));
      out.push_back(res);
    }
  }
  std::vector<double> p;
  for (const auto& r : out) p.push_back(r.p);
  const auto q = bh_correct(p);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].q = q[i];
  return out;
}

Table inference_table(const std::vector<InferenceResult>& results) {
  Table t{"Paired inference against baseline",
          {"agent", "method", "baseline", "n", "excluded", "delta_pp", "ci_lo_pp", "ci_hi_pp", "p", "q_fdr"}};
  for (const auto& r : results) {
    t.rows.push_back({r.agent, std::string(to_string(r.method)), std::string(to_string(r.baseline)),
                      std::to_string(r.n), std::to_string(r.excluded), format_fixed(r.delta_pp, 1),
                      format_fixed(r.lo_pp, 1), format_fixed(r.hi_pp, 1), format_fixed(r.p, 4),
                      format_fixed(r.q, 4)});
  }
  return t;
}

double OverlapResult::jaccard() const {
  const int uni = errors_a + errors_b - overlap;
  return uni ? static_cast<double>(overlap) / uni : 1.0;
}

OverlapResult residual_overlap(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b) {
  auto keys = [](const std::vector<TraceRow>& rows) {
    std::set<std::pair<std::string, int>> out;
    for (const auto& r : rows) out.insert({r.problem_id, r.turn});
    return out;
  };
  if (keys(a) != keys(b)) throw ValidationError("residual overlap needs both traces over the same problems and turns");
  auto errors = [](const std::vector<TraceRow>& rows) {
    std::set<std::pair<std::string, int>> out;
    for (const auto& r : rows) {
      if (!r.answer_correct) out.insert({r.problem_id, r.turn});
    }
    return out;
  };
  const auto ea = errors(a);
  const auto eb = errors(b);
  OverlapResult out;
  out.errors_a = static_cast<int>(ea.size());
  out.errors_b = static_cast<int>(eb.size());
  for (const auto& key : ea) out.overlap += eb.count(key) ? 1 : 0;
  return out;
}

std::vector<TruncationCell> truncation_split(const std::vector<TraceRow>& rows) {
  std::vector<TruncationCell> out;
  for (const auto& [key, group] : by_agent_method(rows)) {
    TruncationCell cell{key.first, std::string(to_string(key.second))};
    int correct = 0, clean_n = 0, clean_correct = 0;
    for (const TraceRow* r : group) {
      ++cell.n;
      correct += r->answer_correct;
      if (r->truncated) {
        ++cell.truncated;
      } else {
        ++clean_n;
        clean_correct += r->answer_correct;
      }
    }
    cell.accuracy_all = cell.n ? static_cast<double>(correct) / cell.n : 0;
    cell.accuracy_clean = clean_n ? static_cast<double>(clean_correct) / clean_n : 0;
    out.push_back(cell);
  }
  return out;
}

Table truncation_table(const std::vector<TraceRow>& rows) {
  Table t{"Truncation robustness", {"agent", "method", "n", "truncated", "accuracy_all_pct", "accuracy_non_truncated_pct"}};
  for (const auto& c : truncation_split(rows)) {
    t.rows.push_back({c.agent, c.method, std::to_string(c.n), std::to_string(c.truncated), pct(c.accuracy_all),
                      pct(c.accuracy_clean)});
  }
  return t;
}

}  // namespace driftbench
