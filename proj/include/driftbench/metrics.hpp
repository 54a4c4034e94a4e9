#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/harness.hpp"

namespace driftbench {

/// A rendered result table; every cell is already formatted text.
struct Table {
  std::string title;
  std::vector<std::string> columns{};
  std::vector<std::vector<std::string>> rows{};
  std::vector<std::string> notes{};

  std::string to_csv() const;
  std::string to_markdown() const;
  nlohmann::ordered_json to_json() const;
};

enum class GroupKey { Agent, Method, Domain, Turn };
std::string_view to_string(GroupKey key);
GroupKey group_key_from_string(std::string_view name);

struct AccuracyCell {
  std::vector<std::string> group;  // one value per requested key
  int n = 0;
  int correct = 0;
  double accuracy() const { return n ? static_cast<double>(correct) / n : 0.0; }
};

/// Mean answer_correct per group, groups in sorted order.
std::vector<AccuracyCell> turn_accuracy(const std::vector<TraceRow>& rows, const std::vector<GroupKey>& keys);
Table accuracy_table(const std::vector<TraceRow>& rows, const std::vector<GroupKey>& keys);

struct RetentionCell {
  std::string agent;
  std::string method;
  std::optional<double> turn1{};
  std::optional<double> turn10{};
  /// turn-10 accuracy / turn-1 accuracy * 100; nullopt without turn-10 rows
  std::optional<double> retain_pct{};
};
std::vector<RetentionCell> retention(const std::vector<TraceRow>& rows);
Table retention_table(const std::vector<TraceRow>& rows);

/// (A_mus - best baseline) / best baseline, as a fraction.
double relative_lift(double direct, double cot, double ledger_only, double mus_repair);
Table lift_table(const std::vector<TraceRow>& rows);

struct ResidualCell {
  std::string agent;
  std::string method;
  int drift = 0;
  int contradiction = 0;
  int other = 0;
  int total() const { return drift + contradiction + other; }
  double share(int count) const { return total() ? 100.0 * count / total() : 0.0; }
};
/// Over answer_correct = false rows: UNSAT ledger is contradiction, an
/// answer_ledger_conflict on a SAT ledger is drift, anything else other.
std::vector<ResidualCell> decompose_residuals(const std::vector<TraceRow>& rows);
Table residual_table(const std::vector<TraceRow>& rows);

struct TriggerCell {
  std::string agent;
  std::string method;
  TriggerCode trigger;
  int events = 0;        // across every attempt record
  int initial_rows = 0;  // rows where the first verification fired it
  double post_repair_accuracy = 0;
  double post_repair_sat = 0;
};
std::vector<TriggerCell> trigger_table(const std::vector<TraceRow>& rows);
Table trigger_counts_table(const std::vector<TraceRow>& rows);

struct PairedDelta {
  std::string problem_id;
  double accuracy_a = 0;
  double accuracy_b = 0;
  double delta = 0;  // a - b
};
struct Pairing {
  std::vector<PairedDelta> deltas;
  int excluded = 0;  // problems present on only one side
};
/// Per-problem mean turn accuracy of (agent, method_a) against (agent, method_b).
Pairing pair_by_problem(const std::vector<TraceRow>& rows, const std::string& agent, MethodKind a, MethodKind b);

inline constexpr int kDefaultResamples = 10000;

/// Percentile bootstrap CI of the mean at `level`. Throws ValidationError for n < 2.
std::pair<double, double> bootstrap_ci(const std::vector<double>& deltas, int resamples, std::uint64_t seed,
                                       double level = 0.95);
/// Two-sided sign-flip test of mean zero, p = (1 + #{|mean*| >= |mean|}) / (1 + R).
double sign_permutation_test(const std::vector<double>& deltas, int resamples, std::uint64_t seed);
/// Benjamini-Hochberg step-up q-values, input order preserved.
std::vector<double> bh_correct(const std::vector<double>& p);

struct InferenceResult {
  std::string agent;
  MethodKind method;
  MethodKind baseline;
  int n = 0;
  int excluded = 0;
  double delta_pp = 0;
  double lo_pp = 0;
  double hi_pp = 0;
  double p = 1;
  double q = 1;
};
/// Every non-baseline method against `baseline` for every agent, BH across
/// all of them.
std::vector<InferenceResult> infer(const std::vector<TraceRow>& rows, MethodKind baseline, int resamples,
                                   std::uint64_t seed);
Table inference_table(const std::vector<InferenceResult>& results);

struct OverlapResult {
  int errors_a = 0;
  int errors_b = 0;
  int overlap = 0;
  double jaccard() const;
  double share_a() const { return errors_a ? static_cast<double>(overlap) / errors_a : 0.0; }
  double share_b() const { return errors_b ? static_cast<double>(overlap) / errors_b : 0.0; }
};
/// Error rows keyed by (problem_id, turn). Throws ValidationError unless both
/// sides cover the same (problem_id, turn) set.
OverlapResult residual_overlap(const std::vector<TraceRow>& a, const std::vector<TraceRow>& b);

struct TruncationCell {
  std::string agent;
  std::string method;
  int n = 0;
  int truncated = 0;
  double accuracy_all = 0;
  double accuracy_clean = 0;  // over non-truncated rows
};
std::vector<TruncationCell> truncation_split(const std::vector<TraceRow>& rows);
Table truncation_table(const std::vector<TraceRow>& rows);

std::string format_fixed(double v, int decimals);

}  // namespace driftbench
