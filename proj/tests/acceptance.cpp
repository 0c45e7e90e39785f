// Acceptance suite: one [PASS]/[FAIL] line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "board_gen.hpp"
#include "mock_server.hpp"
#include "oracles/comment_oracle.hpp"
#include "oracles/stats_oracle.hpp"
#include "snippet_gen.hpp"
#include "synthetic.hpp"
#include "trace_gen.hpp"
#include "svbench/cpre.hpp"
#include "svbench/curate.hpp"
#include "svbench/io.hpp"
#include "svbench/metrics.hpp"
#include "svbench/prompts.hpp"
#include "svbench/report.hpp"
#include "svbench/runner.hpp"
#include "svbench/traces.hpp"

using namespace svbench;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first failed expectation of a criterion.
struct Probe {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string data_file(const std::string& rel) { return io::read_file(prompts::data_dir() / rel); }

void trace_conversion(Probe& p) {
  const auto start = Clock::now();
  const std::string html = data_file("traces/c3_excerpt.html");
  const std::string expected = data_file("traces/c3_excerpt.txt");
  const std::string got = traces::to_plaintext(html);
  p.expect(got == expected, "plain text differs from the reference excerpt");
  p.expect(traces::classify_trace(html) == TraceClass::ManifestBug, "excerpt not classified ManifestBug");
  const double secs = seconds_since(start);
  p.expect(secs < 1.0, "took " + fmt(secs) + " s");
}

void macro_identity(Probe& p) {
  std::vector<VerificationTask> tasks;
  std::vector<RunRecord> records;
  testgen::add_class(tasks, records, Verdict::Holds, 1000, 907, 0);
  testgen::add_class(tasks, records, Verdict::Violated, 1000, 494, 0);
  const auto s = metrics::summarize(metrics::score(records, tasks));
  p.expect(std::fabs(*s.holds.mean - 90.7) < 1e-9, "holds " + fmt(*s.holds.mean));
  p.expect(std::fabs(*s.violated.mean - 49.4) < 1e-9, "violated " + fmt(*s.violated.mean));
  p.expect(std::fabs(*s.overall.mean - 70.05) < 1e-9, "overall " + fmt(*s.overall.mean));
  p.expect(std::fabs(*s.overall.mean - 70.0) <= 0.1, "overall not within 0.1 of 70.0");

  std::mt19937_64 rng(1000);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto board = testgen::random_board(rng, 4 + rng() % 40, 1 + rng() % 4);
    const auto r = metrics::summarize(board);
    if (!r.holds.mean || !r.violated.mean) continue;
    ++checked;
    if (*r.overall.mean != (*r.holds.mean + *r.violated.mean) / 2) {
      p.expect(false, "identity broken on random board " + std::to_string(i));
      break;
    }
  }
  p.expect(checked >= 990, "only " + std::to_string(checked) + " boards had both classes");
}

void parseable_only(Probe& p) {
  std::vector<VerificationTask> tasks;
  std::vector<RunRecord> records;
  testgen::add_class(tasks, records, Verdict::Holds, 1000, 800, 141);
  testgen::add_class(tasks, records, Verdict::Violated, 1000, 494, 127);
  const auto board = metrics::score(records, tasks);
  const auto fixed = metrics::summarize(board);
  const auto cond = metrics::conditional_summary(board);
  p.expect(std::fabs(*cond.unevaluated_rate[0] - 14.1) < 1e-9, "holds unevaluated " + fmt(*cond.unevaluated_rate[0]));
  p.expect(std::fabs(*cond.unevaluated_rate[1] - 12.7) < 1e-9,
           "violated unevaluated " + fmt(*cond.unevaluated_rate[1]));
  p.expect(*cond.violated.mean > *fixed.violated.mean,
           "conditional violated " + fmt(*cond.violated.mean) + " <= fixed " + fmt(*fixed.violated.mean));
}

void curation(Probe& p) {
  const auto start = Clock::now();
  const auto corpus = testgen::full_supply_corpus(100);
  p.expect(corpus.size() == 5000, "corpus size " + std::to_string(corpus.size()));
  curate::HoldoutSpec spec;
  spec.per_property = 100;
  spec.seed = 11;
  const auto a = curate::build_holdout(corpus, spec);
  const auto a2 = curate::build_holdout(corpus, spec);
  spec.seed = 12;
  const auto b = curate::build_holdout(corpus, spec);

  const auto stats = corpus::corpus_stats(a.tasks);
  for (Property prop : kAllProperties) {
    p.expect(stats.count(prop) == 100, std::string(to_string(prop)) + " has " + std::to_string(stats.count(prop)));
    for (Verdict v : kAllVerdicts) {
      p.expect(stats.count(prop, v) == 50, "verdict split off for " + std::string(to_string(prop)));
      for (LengthBin bin : kAllBins)
        p.expect(stats.cells[index_of(prop)][index_of(v)][index_of(bin)] == 10, "cell not 10");
    }
  }
  p.expect(a.tasks == a2.tasks, "same seed gave different holdouts");

  using CellKey = std::tuple<Property, Verdict, LengthBin>;
  auto members = [](const curate::Holdout& h) {
    std::map<CellKey, std::set<std::string>> out;
    for (const auto& t : h.tasks) out[{t.property, t.expected, curate::assign_length_bin(t.loc)}].insert(t.id);
    return out;
  };
  const auto ma = members(a), mb = members(b);
  std::size_t differing = 0;
  for (const auto& [key, ids] : ma) differing += mb.at(key) != ids;
  p.expect(a.composition == b.composition, "composition changed with the seed");
  p.expect(differing == ma.size(), "only " + std::to_string(differing) + " of " + std::to_string(ma.size()) +
                                       " cells changed membership across seeds");
  const double secs = seconds_since(start);
  p.expect(secs < 5.0, "took " + fmt(secs) + " s");
}

void comment_stripper(Probe& p) {
  std::mt19937_64 rng(732);
  for (int i = 0; i < 1000; ++i) {
    const std::string src = testgen::random_snippet(rng);
    const std::string once = cpre::strip_comments(src);
    if (once != oracle::strip_comments_naive(src)) {
      p.expect(false, "oracle mismatch on snippet " + std::to_string(i));
      return;
    }
    if (cpre::strip_comments(once) != once) {
      p.expect(false, "not idempotent on snippet " + std::to_string(i));
      return;
    }
  }
}

void statistics(Probe& p) {
  const auto m = metrics::mcnemar_counts(10, 0);
  const double oracle_p = oracle::exact_mcnemar_by_enumeration(10, 0);
  p.expect(std::fabs(m.p_value - 0.001953125) <= 1e-9, "mcnemar(10,0) = " + fmt(m.p_value));
  p.expect(std::fabs(oracle_p - 0.001953125) <= 1e-9, "enumeration oracle = " + fmt(oracle_p));

  const std::vector<double> base = {70, 71, 69, 72};
  const std::vector<double> shifted = {71, 70, 70, 71};  // differences -1, +1, -1, +1
  const auto t = metrics::paired_t_test(base, shifted);
  p.expect(t.p_value == 1.0, "symmetric differences gave p = " + fmt(t.p_value));

  const std::vector<double> a = {91.2, 92.5, 90.8, 93.0};
  const std::vector<double> b = {88.0, 88.4, 87.9, 89.1};
  const auto ab = metrics::paired_t_test(a, b), ba = metrics::paired_t_test(b, a);
  p.expect(ab.t == -ba.t, "t not antisymmetric");
  p.expect(ab.p_value == ba.p_value, "t-test p not symmetric");
  const double t_ref = oracle::paired_t(a, b);
  const double p_ref = 2 * (1 - oracle::t3_cdf(std::fabs(t_ref)));
  p.expect(std::fabs(ab.t - t_ref) < 1e-9, "t statistic differs from the textbook formula");
  p.expect(std::fabs(ab.p_value - p_ref) < 1e-9, "t-test p " + fmt(ab.p_value) + " vs closed form " + fmt(p_ref));

  std::mt19937_64 rng(733);
  for (int i = 0; i < 200; ++i) {
    std::vector<bool> x(30), y(30);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = rng() % 2;
      y[k] = rng() % 2;
    }
    if (metrics::mcnemar(x, y).p_value != metrics::mcnemar(y, x).p_value) {
      p.expect(false, "mcnemar not symmetric");
      break;
    }
  }
}

void composition(Probe& p) {
  const auto start = Clock::now();
  const auto store = testgen::synthetic_store(3208, 4294, 27000, 500);
  traces::CorpusSpec spec;
  spec.seed = 21;
  auto run = [&](traces::CorpusPreset preset) {
    spec.preset = preset;
    return traces::compose_corpus(store, spec);
  };
  const auto manifest = run(traces::CorpusPreset::ManifestOnly);
  const auto expanded = run(traces::CorpusPreset::Expanded);
  const auto filtered = run(traces::CorpusPreset::Filtered);
  const auto balanced = run(traces::CorpusPreset::Balanced);
  p.expect(manifest.indices.size() == 3208, "ManifestOnly " + std::to_string(manifest.indices.size()));
  p.expect(expanded.indices.size() == 5048, "Expanded " + std::to_string(expanded.indices.size()));
  p.expect(expanded.composition[0] == 754, "Expanded manifest " + std::to_string(expanded.composition[0]));
  p.expect(filtered.indices.size() == 3208 + 4294 + 27000, "Filtered " + std::to_string(filtered.indices.size()));
  p.expect(filtered.composition[3] == 0, "Filtered kept incomplete traces");
  p.expect(balanced.indices.size() == 6416, "Balanced " + std::to_string(balanced.indices.size()));
  p.expect(run(traces::CorpusPreset::Expanded).indices == expanded.indices, "Expanded not deterministic");
  p.expect(run(traces::CorpusPreset::Balanced).indices == balanced.indices, "Balanced not deterministic");
  const double secs = seconds_since(start);
  p.expect(secs < 10.0, "took " + fmt(secs) + " s");
}

fs::path temp_log(const std::string& name) {
  auto path = fs::temp_directory_path() / ("svbench_acceptance_" + name + ".jsonl");
  fs::remove(path);
  return path;
}

void runner_end_to_end(Probe& p) {
  testgen::MockServer server;
  ModelEndpoint e;
  e.name = "mock";
  e.base_url = server.base_url();
  e.request_timeout = 10;
  std::vector<PromptText> prompt_list;
  for (int i = 0; i < 20; ++i)
    prompt_list.push_back({"set/t" + std::to_string(i) + ".yml::unreach-call", "Program " + std::to_string(i), 50});

  using Key = std::tuple<std::string, std::size_t, std::string, std::string>;
  auto multiset = [](const std::vector<RunRecord>& rs) {
    std::vector<Key> out;
    for (const auto& r : rs) out.emplace_back(r.task_id, r.run_index, r.raw_response, std::string(to_string(r.status)));
    std::sort(out.begin(), out.end());
    return out;
  };
  auto unique_pairs = [](const std::vector<RunRecord>& rs) {
    std::set<std::pair<std::string, std::size_t>> keys;
    for (const auto& r : rs) keys.emplace(r.task_id, r.run_index);
    return keys.size();
  };

  // kill after 30 records, then resume
  const auto resumed = temp_log("resume");
  std::atomic<bool> stop{false};
  runner::BenchmarkOptions opt;
  opt.n_runs = 4;
  opt.parallelism = 4;
  opt.stop = &stop;
  std::atomic<std::size_t> seen{0};
  opt.on_record = [&](const RunRecord&) {
    if (++seen == 30) stop = true;
  };
  const auto first = runner::run_benchmark(e, prompt_list, resumed, opt);
  p.expect(first.stopped, "stop request ignored");
  opt.stop = nullptr;
  opt.on_record = nullptr;
  runner::run_benchmark(e, prompt_list, resumed, opt);
  const auto after = runner::read_records(resumed);
  p.expect(after.size() == 80, "resumed log has " + std::to_string(after.size()) + " records");
  p.expect(unique_pairs(after) == 80, "duplicate (task, run) pairs after resume");

  const auto serial = temp_log("p1"), wide = temp_log("p16");
  opt.parallelism = 1;
  runner::run_benchmark(e, prompt_list, serial, opt);
  opt.parallelism = 16;
  runner::run_benchmark(e, prompt_list, wide, opt);
  const auto rs = runner::read_records(serial), rw = runner::read_records(wide);
  p.expect(rs.size() == 80 && unique_pairs(rs) == 80, "parallelism 1 did not give 80 unique records");
  p.expect(multiset(rs) == multiset(rw), "parallelism 1 and 16 differ");
  p.expect(multiset(rs) == multiset(after), "resumed run differs from an uninterrupted one");

  const auto before = server.requests();
  const auto over = runner::execute_task(e, PromptText{"big::x", "x", 5000});
  p.expect(over.status == RunStatus::ContextExceeded, "over-limit prompt not ContextExceeded");
  p.expect(server.requests() == before, "over-limit prompt reached the server");

  for (const auto& f : {resumed, serial, wide}) fs::remove(f);
}

void verdict_corpus(Probe& p) {
  std::ifstream in(std::string(SVBENCH_TEST_FIXTURES) + "/verdict_cases.json");
  const auto cases = nlohmann::json::parse(in);
  p.expect(cases.size() == 25, "fixture has " + std::to_string(cases.size()) + " cases");
  std::size_t i = 0;
  for (const auto& c : cases) {
    const auto got = runner::parse_verdict(c.at("response").get<std::string>());
    p.expect(to_string(got) == c.at("expected").get<std::string>(),
             "case " + std::to_string(i) + " parsed as " + std::string(to_string(got)));
    ++i;
  }
}

void report_path(Probe& p) {
  const auto models = report::load_models(report::baseline_fixture_path());
  const auto sorted = report::sort_by_overall(models);
  p.expect(sorted.size() == 14, "fixture has " + std::to_string(sorted.size()) + " models");
  if (sorted.empty()) return;
  p.expect(sorted.front().name == "Claude Opus 4.7", "first bar is " + sorted.front().name);
  p.expect(sorted.front().holds.mean == 98.3, "first holds " + fmt(sorted.front().holds.mean.value_or(-1)));
  p.expect(sorted.front().violated.mean == 92.0, "first violated " + fmt(sorted.front().violated.mean.value_or(-1)));
  for (std::size_t i = 1; i < sorted.size(); ++i)
    p.expect(*sorted[i - 1].overall() >= *sorted[i].overall(), "bars not in descending overall order");
  for (const auto& m : sorted) p.expect(report::series_complete(m), m.name + " lacks a five-bin series");

  const fs::path dir = fs::temp_directory_path() / "svbench_acceptance_report";
  fs::remove_all(dir);
  report::emit_report(models, {}, dir, {true});
  std::istringstream bars(io::read_file(dir / "bars.csv"));
  std::string header, first;
  std::getline(bars, header);
  std::getline(bars, first);
  p.expect(first.rfind("1,Claude Opus 4.7,98.3,0.2,92.0,0.6,", 0) == 0, "bars.csv first row: " + first);
  std::istringstream decay(io::read_file(dir / "length_decay.csv"));
  std::size_t rows = 0;
  for (std::string line; std::getline(decay, line);) ++rows;
  p.expect(rows == 1 + 14 * 2 * 5, "length_decay.csv has " + std::to_string(rows) + " lines");
  p.expect(fs::exists(dir / "bars.svg") && fs::exists(dir / "length_decay.svg"), "svg charts missing");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Probe&)>>> criteria = {
      {"Trace conversion fixture-exactness", trace_conversion},
      {"Macro-average identity", macro_identity},
      {"Parseable-only consistency", parseable_only},
      {"Curation invariants", curation},
      {"Comment stripper differential test", comment_stripper},
      {"Statistics oracles", statistics},
      {"Corpus composition", composition},
      {"Runner end-to-end against a mock server", runner_end_to_end},
      {"Verdict parser corpus", verdict_corpus},
      {"Report path on the published baseline", report_path},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Probe probe;
    try {
      check(probe);
    } catch (const std::exception& e) {
      probe.failures.push_back(std::string("exception: ") + e.what());
    }
    if (probe.failures.empty()) {
      std::cout << "[PASS] " << name << '\n';
    } else {
      ++failed;
      std::cout << "[FAIL] " << name << ": " << probe.failures.front();
      if (probe.failures.size() > 1) std::cout << " (+" << probe.failures.size() - 1 << " more)";
      std::cout << '\n';
    }
  }
  std::cout << (criteria.size() - failed) << '/' << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
