#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "svbench/corpus.hpp"
#include "svbench/domain.hpp"
#include "svbench/runner.hpp"

namespace svbench {

struct TaskOutcome {
  std::string task_id;
  std::size_t run_index = 0;
  ParsedVerdict predicted = ParsedVerdict::Unparseable;
  Verdict expected = Verdict::Holds;
  Property property = Property::Reachability;
  std::optional<LengthBin> bin;
  bool correct = false;
  bool evaluated = false;
};

struct Scoreboard {
  std::string endpoint_name;
  std::size_t n_runs = 0;
  std::vector<std::string> task_ids;   // sorted
  std::vector<TaskOutcome> outcomes;   // task-major, then run
  std::vector<RunRecord> records;      // aligned with outcomes

  std::vector<std::vector<std::size_t>> by_run;
  std::array<std::vector<std::size_t>, 5> by_property;
  std::array<std::vector<std::size_t>, 5> by_bin;
  std::array<std::vector<std::size_t>, 2> by_verdict;
};

/// Mean and population std across runs, in percent. Absent when no run had a
/// nonzero denominator.
struct CellStat {
  std::optional<double> mean;
  std::optional<double> std;
  std::vector<std::optional<double>> per_run;
};

struct AccuracySummary {
  bool conditional = false;
  std::size_t n_runs = 0;
  CellStat holds;
  CellStat violated;
  CellStat overall;  // macro-average of holds and violated
  std::array<std::array<CellStat, 2>, 5> per_property;
  std::array<std::array<CellStat, 2>, 5> per_bin;
  std::array<std::optional<double>, 2> unevaluated_rate;  // percent, pooled over runs, by expected verdict

  const CellStat& by_verdict(Verdict v) const { return v == Verdict::Holds ? holds : violated; }
};

nlohmann::json to_json(const AccuracySummary& s);

}  // namespace svbench

namespace svbench::metrics {

struct ScoreOptions {
  std::string thinking_open = "<think>";
  std::string thinking_close = "</think>";
};

/// Resolves every record against the task set. Throws UnknownTask for ids not
/// in `tasks`, InvalidArgument for duplicates or mixed endpoints, and
/// IncompleteRunSet unless every task has runs 0..n-1.
Scoreboard score(std::span<const RunRecord> records, std::span<const VerificationTask> tasks,
                 const ScoreOptions& options = {});

/// Fixed denominators: unevaluated outcomes count as incorrect.
AccuracySummary summarize(const Scoreboard& board);
/// Denominators restricted to evaluated outcomes.
AccuracySummary conditional_summary(const Scoreboard& board);

/// One row per cell: scope,property,bin,verdict,mean,std,runs.
std::string summary_csv(const AccuracySummary& s);

/// Per-run holds, violated and overall accuracies (percent) for the t-test.
std::vector<double> per_run_overall(const AccuracySummary& s);

struct TTestResult {
  double t = 0;
  std::size_t df = 0;
  double mean_difference = 0;
  double p_value = 1;
  bool degenerate = false;  // zero variance in the differences
};

/// Two-sided paired t-test on a[i] - b[i]. Throws TooFewRuns below 2 pairs,
/// InvalidArgument on length mismatch.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct McNemarResult {
  std::size_t a_only = 0;  // b: A correct, B wrong
  std::size_t b_only = 0;  // c: B correct, A wrong
  double p_value = 1;
  bool exact = true;
  bool no_discordance = false;
};

McNemarResult mcnemar_counts(std::size_t a_only, std::size_t b_only);
McNemarResult mcnemar(const std::vector<bool>& a_correct, const std::vector<bool>& b_correct);

/// Per-task correctness collapsed across runs: correct iff correct in a
/// strict majority of runs. Ordered as board.task_ids.
std::vector<bool> majority_correct(const Scoreboard& board);

/// McNemar on two boards over the same task set.
McNemarResult compare_boards(const Scoreboard& a, const Scoreboard& b);

}  // namespace svbench::metrics
