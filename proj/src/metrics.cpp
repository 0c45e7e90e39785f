#include "svbench/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "svbench/curate.hpp"
#include "svbench/error.hpp"
#include "svbench/io.hpp"

namespace svbench {

namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json cell_json(const CellStat& c) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : c.per_run) runs.push_back(opt_json(r));
  return {{"mean", opt_json(c.mean)}, {"std", opt_json(c.std)}, {"per_run", runs}};
}

}  // namespace

nlohmann::json to_json(const AccuracySummary& s) {
  nlohmann::json j = {{"conditional", s.conditional},
                      {"n_runs", s.n_runs},
                      {"holds", cell_json(s.holds)},
                      {"violated", cell_json(s.violated)},
                      {"overall", cell_json(s.overall)}};
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      j["per_property"][std::string(to_string(p))][std::string(to_string(v))] =
          cell_json(s.per_property[index_of(p)][index_of(v)]);
  for (LengthBin b : kAllBins)
    for (Verdict v : kAllVerdicts)
      j["per_bin"][std::string(to_string(b))][std::string(to_string(v))] = cell_json(s.per_bin[index_of(b)][index_of(v)]);
  for (Verdict v : kAllVerdicts) j["unevaluated_rate"][std::string(to_string(v))] = opt_json(s.unevaluated_rate[index_of(v)]);
  return j;
}

}  // namespace svbench

namespace svbench::metrics {

Scoreboard score(std::span<const RunRecord> records, std::span<const VerificationTask> tasks,
                 const ScoreOptions& options) {
  std::map<std::string, const VerificationTask*> by_id;
  for (const auto& t : tasks)
    if (!by_id.emplace(t.id, &t).second) throw Error(ErrorCode::InvalidArgument, "duplicate task " + t.id);

  Scoreboard board;
  std::map<std::pair<std::string, std::size_t>, const RunRecord*> keyed;
  for (const auto& r : records) {
    if (!by_id.count(r.task_id)) throw Error(ErrorCode::UnknownTask, "record for unknown task " + r.task_id);
    if (board.endpoint_name.empty()) board.endpoint_name = r.endpoint_name;
    else if (board.endpoint_name != r.endpoint_name)
      throw Error(ErrorCode::InvalidArgument,
                  "records from two endpoints: " + board.endpoint_name + " and " + r.endpoint_name);
    if (!keyed.emplace(std::pair{r.task_id, r.run_index}, &r).second)
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate record for " + r.task_id + " run " + std::to_string(r.run_index));
    board.n_runs = std::max(board.n_runs, r.run_index + 1);
  }
  if (records.empty()) throw Error(ErrorCode::IncompleteRunSet, "no run records");

  std::size_t missing = 0;
  std::string first_missing;
  for (const auto& [id, task] : by_id)
    for (std::size_t run = 0; run < board.n_runs; ++run)
      if (!keyed.count({id, run})) {
        if (missing++ == 0) first_missing = id + " run " + std::to_string(run);
      }
  if (missing)
    throw Error(ErrorCode::IncompleteRunSet, std::to_string(missing) + " of " +
                                                 std::to_string(by_id.size() * board.n_runs) +
                                                 " records missing, first: " + first_missing);

  board.by_run.resize(board.n_runs);
  for (const auto& [id, task] : by_id) {
    board.task_ids.push_back(id);
    for (std::size_t run = 0; run < board.n_runs; ++run) {
      const RunRecord& r = *keyed.at({id, run});
      TaskOutcome o;
      o.task_id = id;
      o.run_index = run;
      o.expected = task->expected;
      o.property = task->property;
      o.bin = curate::try_length_bin(task->loc);
      if (r.status == RunStatus::Ok || r.status == RunStatus::OutputBudgetExhausted)
        o.predicted = runner::parse_verdict(r.raw_response, options.thinking_open, options.thinking_close);
      o.evaluated = o.predicted != ParsedVerdict::Unparseable;
      o.correct = o.evaluated && (o.predicted == ParsedVerdict::Holds) == (o.expected == Verdict::Holds);

      const std::size_t k = board.outcomes.size();
      board.by_run[run].push_back(k);
      board.by_property[index_of(o.property)].push_back(k);
      if (o.bin) board.by_bin[index_of(*o.bin)].push_back(k);
      board.by_verdict[index_of(o.expected)].push_back(k);
      board.outcomes.push_back(std::move(o));
      board.records.push_back(r);
    }
  }
  return board;
}

namespace {

template <typename Pred>
CellStat cell(const Scoreboard& board, bool conditional, Pred in_cell) {
  std::vector<std::size_t> hits(board.n_runs, 0), denom(board.n_runs, 0);
  for (const auto& o : board.outcomes) {
    if (!in_cell(o)) continue;
    if (conditional && !o.evaluated) continue;
    ++denom[o.run_index];
    hits[o.run_index] += o.correct;
  }
  CellStat c;
  std::vector<double> present;
  for (std::size_t r = 0; r < board.n_runs; ++r) {
    if (denom[r] == 0) {
      c.per_run.push_back(std::nullopt);
      continue;
    }
    const double acc = 100.0 * static_cast<double>(hits[r]) / static_cast<double>(denom[r]);
    c.per_run.push_back(acc);
    present.push_back(acc);
  }
  if (present.empty()) return c;
  const double mean = std::accumulate(present.begin(), present.end(), 0.0) / static_cast<double>(present.size());
  double ss = 0;
  for (double x : present) ss += (x - mean) * (x - mean);
  c.mean = mean;
  c.std = std::sqrt(ss / static_cast<double>(present.size()));
  return c;
}

AccuracySummary build_summary(const Scoreboard& board, bool conditional) {
  AccuracySummary s;
  s.conditional = conditional;
  s.n_runs = board.n_runs;
  s.holds = cell(board, conditional, [](const TaskOutcome& o) { return o.expected == Verdict::Holds; });
  s.violated = cell(board, conditional, [](const TaskOutcome& o) { return o.expected == Verdict::Violated; });

  for (std::size_t r = 0; r < board.n_runs; ++r) {
    const auto& h = s.holds.per_run[r];
    const auto& v = s.violated.per_run[r];
    s.overall.per_run.push_back(h && v ? std::optional<double>((*h + *v) / 2) : std::nullopt);
  }
  if (s.holds.mean && s.violated.mean) {
    s.overall.mean = (*s.holds.mean + *s.violated.mean) / 2;
    std::vector<double> xs;
    for (const auto& x : s.overall.per_run)
      if (x) xs.push_back(*x);
    if (!xs.empty()) {
      const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      double ss = 0;
      for (double x : xs) ss += (x - m) * (x - m);
      s.overall.std = std::sqrt(ss / static_cast<double>(xs.size()));
    }
  }

  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      s.per_property[index_of(p)][index_of(v)] =
          cell(board, conditional, [&](const TaskOutcome& o) { return o.property == p && o.expected == v; });
  for (LengthBin b : kAllBins)
    for (Verdict v : kAllVerdicts)
      s.per_bin[index_of(b)][index_of(v)] =
          cell(board, conditional, [&](const TaskOutcome& o) { return o.bin == b && o.expected == v; });

  for (Verdict v : kAllVerdicts) {
    const auto& idx = board.by_verdict[index_of(v)];
    if (idx.empty()) continue;
    std::size_t unevaluated = 0;
    for (std::size_t k : idx) unevaluated += !board.outcomes[k].evaluated;
    s.unevaluated_rate[index_of(v)] = 100.0 * static_cast<double>(unevaluated) / static_cast<double>(idx.size());
  }
  return s;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

}  // namespace

AccuracySummary summarize(const Scoreboard& board) { return build_summary(board, false); }
AccuracySummary conditional_summary(const Scoreboard& board) { return build_summary(board, true); }

std::string summary_csv(const AccuracySummary& s) {
  std::ostringstream os;
  os << "scope,property,bin,verdict,mean,std,runs\n";
  auto row = [&](std::string_view scope, std::string_view prop, std::string_view bin, std::string_view verdict,
                 const CellStat& c) {
    std::size_t runs = 0;
    for (const auto& r : c.per_run) runs += r.has_value();
    os << scope << ',' << prop << ',' << bin << ',' << verdict << ',' << fmt(c.mean) << ',' << fmt(c.std) << ','
       << runs << '\n';
  };
  row("overall", "", "", "", s.overall);
  row("verdict", "", "", "Holds", s.holds);
  row("verdict", "", "", "Violated", s.violated);
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts) row("property", to_string(p), "", to_string(v), s.per_property[index_of(p)][index_of(v)]);
  for (LengthBin b : kAllBins)
    for (Verdict v : kAllVerdicts) row("bin", "", to_string(b), to_string(v), s.per_bin[index_of(b)][index_of(v)]);
  for (Verdict v : kAllVerdicts)
    os << "unevaluated,,," << to_string(v) << ',' << fmt(s.unevaluated_rate[index_of(v)]) << ",," << s.n_runs << '\n';
  return os.str();
}

std::vector<double> per_run_overall(const AccuracySummary& s) {
  std::vector<double> out;
  for (const auto& x : s.overall.per_run)
    if (x) out.push_back(*x);
  return out;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::InvalidArgument, "paired t-test needs equal lengths, got " + std::to_string(a.size()) +
                                                " and " + std::to_string(b.size()));
  if (a.size() < 2) throw Error(ErrorCode::TooFewRuns, "paired t-test needs at least 2 runs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.df = n - 1;
  r.mean_difference = mean;
  if (sd == 0) {
    r.degenerate = true;
    r.t = 0;
    r.p_value = mean == 0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p_value = std::min(1.0, 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

McNemarResult mcnemar_counts(std::size_t a_only, std::size_t b_only) {
  McNemarResult r;
  r.a_only = a_only;
  r.b_only = b_only;
  const std::size_t n = a_only + b_only;
  if (n == 0) {
    r.no_discordance = true;
    r.p_value = 1.0;
    return r;
  }
  if (n <= 25) {
    // Two-sided exact binomial with p = 1/2.
    const std::size_t k = std::min(a_only, b_only);
    double tail = 0;
    double coeff = 1;  // C(n, i)
    for (std::size_t i = 0; i <= k; ++i) {
      tail += coeff;
      coeff = coeff * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    r.p_value = std::min(1.0, 2 * tail / std::ldexp(1.0, static_cast<int>(n)));
    r.exact = true;
    return r;
  }
  const double diff = std::fabs(static_cast<double>(a_only) - static_cast<double>(b_only)) - 1;
  const double chi2 = diff * diff / static_cast<double>(n);
  r.p_value = std::erfc(std::sqrt(chi2 / 2));
  r.exact = false;
  return r;
}

McNemarResult mcnemar(const std::vector<bool>& a_correct, const std::vector<bool>& b_correct) {
  if (a_correct.size() != b_correct.size())
    throw Error(ErrorCode::InvalidArgument, "McNemar needs the same task set for both models");
  std::size_t a_only = 0, b_only = 0;
  for (std::size_t i = 0; i < a_correct.size(); ++i) {
    a_only += a_correct[i] && !b_correct[i];
    b_only += !a_correct[i] && b_correct[i];
  }
  return mcnemar_counts(a_only, b_only);
}

std::vector<bool> majority_correct(const Scoreboard& board) {
  std::vector<bool> out;
  out.reserve(board.task_ids.size());
  for (std::size_t t = 0; t < board.task_ids.size(); ++t) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < board.n_runs; ++r) hits += board.outcomes[t * board.n_runs + r].correct;
    out.push_back(2 * hits > board.n_runs);
  }
  return out;
}

McNemarResult compare_boards(const Scoreboard& a, const Scoreboard& b) {
  if (a.task_ids != b.task_ids) throw Error(ErrorCode::InvalidArgument, "boards cover different task sets");
  return mcnemar(majority_correct(a), majority_correct(b));
}

}  // namespace svbench::metrics
