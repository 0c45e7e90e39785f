// svbench: command-line driver for the verification benchmark pipeline.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "svbench/config.hpp"
#include "svbench/corpus.hpp"
#include "svbench/curate.hpp"
#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/judge.hpp"
#include "svbench/metrics.hpp"
#include "svbench/prompts.hpp"
#include "svbench/report.hpp"
#include "svbench/runner.hpp"
#include "svbench/traces.hpp"

namespace fs = std::filesystem;
using namespace svbench;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

// Fresh <root>/<stage>/<UTC timestamp> directory; never reuses an existing one.
fs::path fresh_output_dir(const fs::path& root, const fs::path& stage) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[40];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  char full[64];
  std::snprintf(full, sizeof full, "%s.%03dZ", stamp, static_cast<int>(ms));
  const fs::path parent = root / stage;
  fs::create_directories(parent);
  for (int n = 0;; ++n) {
    std::string name = full;
    if (n > 0) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "-%03d", n);
      name += suffix;
    }
    if (fs::create_directory(parent / name)) return parent / name;
  }
}

// Newest timestamped directory under <root>/<stage>.
fs::path latest_output_dir(const fs::path& root, const fs::path& stage, std::string_view hint) {
  const fs::path parent = root / stage;
  std::optional<fs::path> best;
  if (fs::is_directory(parent))
    for (const auto& e : fs::directory_iterator(parent))
      if (e.is_directory() && (!best || e.path().filename() > best->filename())) best = e.path();
  if (!best)
    throw Error(ErrorCode::Io, "no " + parent.generic_string() + " output found; run `svbench " +
                                   parent.filename().string() + "` first or pass " + std::string(hint));
  return *best;
}

std::vector<VerificationTask> read_tasks(const fs::path& path) {
  std::vector<VerificationTask> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(task_from_json(j));
  return out;
}

std::vector<PromptText> read_prompts(const fs::path& path) {
  std::vector<PromptText> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(prompt_from_json(j));
  return out;
}

std::string endpoint_dir_name(std::string_view name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_') ? c : '_';
  return out;
}

fs::path default_log(const config::ProjectConfig& cfg, std::string_view endpoint) {
  return cfg.output_root / "runs" / endpoint_dir_name(endpoint) / "records.jsonl";
}

std::vector<ModelEndpoint> registry(const config::ProjectConfig& cfg) {
  if (!cfg.endpoint_registry)
    throw Error(ErrorCode::Config, cfg.config_path.string() + ": no endpoint registry configured (key 'endpoints')");
  return runner::load_endpoints(*cfg.endpoint_registry);
}

curate::Holdout holdout_from(const config::ProjectConfig& cfg, const std::string& dir_flag) {
  const fs::path dir = dir_flag.empty() ? latest_output_dir(cfg.output_root, "curate", "--holdout") : fs::path(dir_flag);
  return curate::read_holdout(dir);
}

struct Scored {
  Scoreboard board;
  fs::path log;
};

Scored score_log(const config::ProjectConfig& cfg, const curate::Holdout& holdout, const std::string& endpoint,
                 const std::string& log_flag) {
  if (endpoint.empty() && log_flag.empty()) throw CLI::ValidationError("--endpoint", "either --endpoint or --log is required");
  const fs::path log = log_flag.empty() ? default_log(cfg, endpoint) : fs::path(log_flag);
  if (!fs::exists(log)) throw Error(ErrorCode::Io, "record log not found: " + log.string());
  const auto records = runner::read_records(log);
  if (records.empty()) throw Error(ErrorCode::IncompleteRunSet, "record log is empty: " + log.string());

  metrics::ScoreOptions opts;
  const std::string& name = endpoint.empty() ? records.front().endpoint_name : endpoint;
  if (cfg.endpoint_registry) {
    for (const auto& e : runner::load_endpoints(*cfg.endpoint_registry))
      if (e.name == name) {
        opts.thinking_open = e.thinking_open;
        opts.thinking_close = e.thinking_close;
      }
  }
  return {metrics::score(records, holdout.tasks, opts), log};
}

json summary_json(const Scoreboard& board, const AccuracySummary& s) {
  json j = to_json(s);
  j["endpoint"] = board.endpoint_name;
  return j;
}

void say(const std::string& line) { std::cout << line << '\n'; }

// Subcommand handlers. Each returns after writing its outputs.

void cmd_ingest(const config::ProjectConfig& cfg) {
  if (cfg.corpus_roots.empty()) throw Error(ErrorCode::Config, cfg.config_path.string() + ": corpus.roots is empty");
  const auto excl = config::load_exclusions(cfg);
  std::vector<VerificationTask> accepted;
  std::vector<corpus::Rejection> rejected;
  for (const auto& root : cfg.corpus_roots) {
    auto r = corpus::ingest_tree(root, excl);
    accepted.insert(accepted.end(), r.accepted.begin(), r.accepted.end());
    rejected.insert(rejected.end(), r.rejection_log.begin(), r.rejection_log.end());
  }
  const fs::path dir = fresh_output_dir(cfg.output_root, "ingest");
  std::vector<json> rows;
  for (const auto& t : accepted) rows.push_back(to_json(t));
  io::write_jsonl(dir / "tasks.jsonl", rows);
  rows.clear();
  for (const auto& r : rejected) rows.push_back(to_json(r));
  io::write_jsonl(dir / "rejections.jsonl", rows);

  const auto stats = corpus::corpus_stats(accepted);
  std::ostringstream csv;
  csv << "property,verdict,bin,count\n";
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      for (LengthBin b : kAllBins)
        csv << to_string(p) << ',' << to_string(v) << ',' << to_string(b) << ','
            << stats.cells[index_of(p)][index_of(v)][index_of(b)] << '\n';
  csv << "unbinnable,,," << stats.unbinnable << '\n';
  io::write_file_atomic(dir / "corpus_stats.csv", csv.str());
  say("accepted " + std::to_string(accepted.size()) + ", rejected " + std::to_string(rejected.size()) + " -> " +
      dir.string());
}

struct CurateArgs {
  std::string tasks;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> per_property;
  bool relax = false;
};

void cmd_curate(const config::ProjectConfig& cfg, const CurateArgs& a) {
  const fs::path tasks_path =
      a.tasks.empty() ? latest_output_dir(cfg.output_root, "ingest", "--tasks") / "tasks.jsonl" : fs::path(a.tasks);
  const auto tasks = read_tasks(tasks_path);
  curate::HoldoutSpec spec = cfg.holdout;
  if (a.seed) spec.seed = *a.seed;
  if (a.per_property) spec.per_property = *a.per_property;
  const auto holdout = (a.relax || cfg.relax_bins) ? curate::relax_bin_balance(tasks, spec) : curate::build_holdout(tasks, spec);
  const fs::path dir = fresh_output_dir(cfg.output_root, "curate");
  curate::write_holdout(holdout, dir);
  say("holdout of " + std::to_string(holdout.tasks.size()) + " tasks -> " + dir.string());
}

struct PromptArgs {
  std::string holdout;
  std::string templates;
  std::string fewshot_bug;
  std::string fewshot_safe;
};

void cmd_prompt(const config::ProjectConfig& cfg, const PromptArgs& a) {
  const auto holdout = holdout_from(cfg, a.holdout);
  const auto templates =
      a.templates.empty() ? prompts::TemplateSet::builtin() : prompts::TemplateSet::load(a.templates);
  const bool fewshot = !a.fewshot_bug.empty() || !a.fewshot_safe.empty();
  const std::string bug = a.fewshot_bug.empty() ? "" : io::read_file(a.fewshot_bug);
  const std::string safe = a.fewshot_safe.empty() ? "" : io::read_file(a.fewshot_safe);
  std::vector<json> rows;
  std::size_t tokens = 0;
  for (const auto& t : holdout.tasks) {
    const PromptText p = fewshot ? prompts::render_fewshot(templates, t, bug, safe) : prompts::render_prompt(templates, t);
    tokens += p.estimated_tokens;
    rows.push_back(to_json(p));
  }
  const fs::path dir = fresh_output_dir(cfg.output_root, "prompt");
  io::write_jsonl(dir / "prompts.jsonl", rows);
  say(std::to_string(rows.size()) + " prompts (~" + std::to_string(tokens) + " tokens) -> " + dir.string());
}

struct RunArgs {
  std::string endpoint;
  std::string prompts;
  std::string log;
  std::size_t runs = 4;
  std::size_t parallelism = 1;
  std::optional<std::size_t> max_output_tokens;
  std::size_t max_input_tokens = runner::RunnerOptions{}.max_input_tokens;
};

int cmd_run(const config::ProjectConfig& cfg, const RunArgs& a) {
  const auto endpoints = registry(cfg);
  ModelEndpoint endpoint = runner::find_endpoint(endpoints, a.endpoint);
  if (a.max_output_tokens) endpoint.decoding.max_output_tokens = *a.max_output_tokens;
  const fs::path prompts_path =
      a.prompts.empty() ? latest_output_dir(cfg.output_root, "prompt", "--prompts") / "prompts.jsonl" : fs::path(a.prompts);
  const auto prompt_list = read_prompts(prompts_path);
  const fs::path log = a.log.empty() ? default_log(cfg, endpoint.name) : fs::path(a.log);
  fs::create_directories(log.parent_path());

  runner::BenchmarkOptions opts;
  opts.n_runs = a.runs;
  opts.parallelism = a.parallelism;
  opts.runner.max_input_tokens = a.max_input_tokens;
  opts.stop = &g_stop;
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  const auto progress = runner::run_benchmark(endpoint, prompt_list, log, opts);
  say("planned " + std::to_string(progress.planned) + ", skipped " + std::to_string(progress.skipped) + ", wrote " +
      std::to_string(progress.written) + " -> " + log.string());
  if (progress.stopped) {
    std::cerr << "svbench: interrupted; rerun the same command to resume\n";
    return 1;
  }
  return 0;
}

struct ScoreArgs {
  std::string endpoint;
  std::string log;
  std::string holdout;
};

void cmd_score(const config::ProjectConfig& cfg, const ScoreArgs& a) {
  const auto holdout = holdout_from(cfg, a.holdout);
  const auto scored = score_log(cfg, holdout, a.endpoint, a.log);
  const auto fixed = metrics::summarize(scored.board);
  const auto cond = metrics::conditional_summary(scored.board);
  const fs::path dir = fresh_output_dir(cfg.output_root, fs::path("score") / endpoint_dir_name(scored.board.endpoint_name));
  io::write_file_atomic(dir / "summary.csv", metrics::summary_csv(fixed));
  io::write_file_atomic(dir / "summary.json", summary_json(scored.board, fixed).dump(2) + "\n");
  io::write_file_atomic(dir / "conditional_summary.csv", metrics::summary_csv(cond));
  io::write_file_atomic(dir / "conditional_summary.json", summary_json(scored.board, cond).dump(2) + "\n");
  std::ostringstream line;
  line.precision(1);
  line << std::fixed << scored.board.endpoint_name << ": holds " << fixed.holds.mean.value_or(0) << ", violated "
       << fixed.violated.mean.value_or(0) << ", overall " << fixed.overall.mean.value_or(0) << " -> " << dir.string();
  say(line.str());
}

struct CompareArgs {
  std::string endpoint_a, endpoint_b, log_a, log_b, holdout;
};

void cmd_compare(const config::ProjectConfig& cfg, const CompareArgs& a) {
  const auto holdout = holdout_from(cfg, a.holdout);
  const auto sa = score_log(cfg, holdout, a.endpoint_a, a.log_a);
  const auto sb = score_log(cfg, holdout, a.endpoint_b, a.log_b);
  const auto fa = metrics::summarize(sa.board);
  const auto fb = metrics::summarize(sb.board);
  report::Comparison c;
  c.model_a = sa.board.endpoint_name;
  c.model_b = sb.board.endpoint_name;
  const auto ra = metrics::per_run_overall(fa);
  const auto rb = metrics::per_run_overall(fb);
  c.t_test = metrics::paired_t_test(ra, rb);
  c.mcnemar = metrics::compare_boards(sa.board, sb.board);
  const fs::path dir = fresh_output_dir(cfg.output_root, "compare");
  io::write_file_atomic(dir / "comparison.json", json::array({report::to_json(c)}).dump(2) + "\n");
  io::write_file_atomic(dir / "comparisons.csv", report::comparisons_csv({c}));
  io::write_file_atomic(dir / "summary_a.json", summary_json(sa.board, fa).dump(2) + "\n");
  io::write_file_atomic(dir / "summary_b.json", summary_json(sb.board, fb).dump(2) + "\n");
  std::ostringstream line;
  line << c.model_a << " vs " << c.model_b << ": paired t p=" << c.t_test->p_value << ", McNemar p=" << c.mcnemar->p_value
       << " -> " << dir.string();
  say(line.str());
}

std::vector<TraceDocument> trace_store(const config::ProjectConfig& cfg, const std::string& flag) {
  fs::path dir;
  if (!flag.empty()) dir = flag;
  else if (cfg.trace_store) dir = *cfg.trace_store;
  else throw Error(ErrorCode::Config, cfg.config_path.string() + ": no trace_store configured; pass --store");
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "trace store not found: " + dir.string());
  return traces::load_trace_store(dir);
}

void cmd_traces_classify(const config::ProjectConfig& cfg, const std::vector<std::string>& inputs,
                         const std::string& store) {
  std::ostringstream csv;
  csv << "source,class\n";
  std::array<std::size_t, 4> counts{};
  auto add = [&](const std::string& id, TraceClass c) {
    csv << io::csv_field(id) << ',' << to_string(c) << '\n';
    ++counts[static_cast<std::size_t>(c)];
  };
  if (!inputs.empty()) {
    for (const auto& in : inputs) add(in, traces::classify_trace(io::read_file(in)));
  } else {
    for (const auto& d : trace_store(cfg, store)) add(d.source_id, d.trace_class);
  }
  const fs::path dir = fresh_output_dir(cfg.output_root, fs::path("traces") / "classify");
  io::write_file_atomic(dir / "classes.csv", csv.str());
  std::ostringstream line;
  for (std::size_t i = 0; i < counts.size(); ++i)
    line << to_string(static_cast<TraceClass>(i)) << '=' << counts[i] << ' ';
  say(line.str() + "-> " + dir.string());
}

void cmd_traces_convert(const config::ProjectConfig& cfg, const std::vector<std::string>& inputs, TraceFormat format) {
  if (inputs.empty()) throw CLI::ValidationError("--input", "at least one input trace is required");
  const fs::path dir = fresh_output_dir(cfg.output_root, fs::path("traces") / "convert");
  for (const auto& in : inputs) {
    const auto doc = traces::make_document(fs::path(in).stem().string(), "", io::read_file(in));
    const char* ext = format == TraceFormat::Html ? ".html" : ".txt";
    const fs::path out = dir / (fs::path(in).stem().string() + (format == TraceFormat::Stripped ? ".stripped" : "") + ext);
    const std::string& text = format == TraceFormat::Html ? *doc.cleaned_html : traces::text_in(doc, format);
    io::write_file_atomic(out, text);
  }
  say(std::to_string(inputs.size()) + " trace(s) converted -> " + dir.string());
}

struct ComposeArgs {
  std::string store;
  std::string preset = "manifest-only";
  std::uint64_t seed = 0;
  std::size_t manifest_count = traces::CorpusSpec{}.manifest_count;
  std::size_t latent_count = traces::CorpusSpec{}.latent_count;
  std::string format = "html";
  bool prepend_source = false;
  bool drop_verdict = false;
};

traces::CorpusSpec corpus_spec(const ComposeArgs& a) {
  const auto preset = traces::corpus_preset_from_string(a.preset);
  if (!preset) throw CLI::ValidationError("--preset", "unknown preset " + a.preset);
  traces::CorpusSpec spec;
  spec.preset = *preset;
  spec.seed = a.seed;
  spec.manifest_count = a.manifest_count;
  spec.latent_count = a.latent_count;
  spec.format = *trace_format_from_string(a.format);
  return spec;
}

json composition_json(const traces::ClassCounts& c) {
  json j;
  for (std::size_t i = 0; i < c.size(); ++i) j[std::string(to_string(static_cast<TraceClass>(i)))] = c[i];
  return j;
}

void cmd_traces_compose(const config::ProjectConfig& cfg, const ComposeArgs& a) {
  const auto spec = corpus_spec(a);
  const auto store = trace_store(cfg, a.store);
  const auto sel = traces::compose_corpus(store, spec);
  json ids = json::array();
  for (std::size_t i : sel.indices) ids.push_back(store[i].source_id);
  const json out = {{"preset", to_string(spec.preset)},
                    {"seed", spec.seed},
                    {"document_count", sel.indices.size()},
                    {"composition", composition_json(sel.composition)},
                    {"documents", ids}};
  const fs::path dir = fresh_output_dir(cfg.output_root, fs::path("traces") / "compose");
  io::write_file_atomic(dir / "selection.json", out.dump(2) + "\n");
  say(std::to_string(sel.indices.size()) + " documents selected -> " + dir.string());
}

void cmd_traces_pack(const config::ProjectConfig& cfg, const ComposeArgs& a) {
  const auto spec = corpus_spec(a);
  const auto store = trace_store(cfg, a.store);
  const auto sel = traces::compose_corpus(store, spec);
  traces::PackOptions opts;
  opts.prepend_source = a.prepend_source;
  opts.drop_verdict_lines = a.drop_verdict;
  const fs::path dir = fresh_output_dir(cfg.output_root, fs::path("traces") / "pack");
  const auto packed = traces::pack_corpus(store, sel, spec, dir / "corpus.txt", opts);
  say(std::to_string(packed.document_count) + " documents, ~" + std::to_string(packed.estimated_tokens) +
      " tokens -> " + packed.output_path);
}

struct JudgeArgs {
  std::string endpoint;
  std::string model;
  std::string log;
  std::string holdout;
  std::size_t run_index = 0;
  std::size_t parallelism = 1;
};

void cmd_judge(const config::ProjectConfig& cfg, const JudgeArgs& a) {
  const auto endpoints = registry(cfg);
  const ModelEndpoint& judge_endpoint = runner::find_endpoint(endpoints, a.endpoint);
  const auto holdout = holdout_from(cfg, a.holdout);
  const auto scored = score_log(cfg, holdout, a.model, a.log);
  const auto cases = judge::select_failures(scored.board, a.run_index);
  judge::JudgeOptions opts;
  opts.parallelism = a.parallelism;
  auto adapter = runner::make_adapter(judge_endpoint);
  const auto labels = judge::run_judge(*adapter, judge_endpoint, cases, holdout.tasks, opts);

  const fs::path dir = fresh_output_dir(cfg.output_root, "judge");
  std::vector<json> rows;
  for (const auto& l : labels) rows.push_back(judge::to_json(l));
  io::write_jsonl(dir / "labels.jsonl", rows);
  for (auto d : {FailureDirection::FalseNegative, FailureDirection::FalsePositive}) {
    const auto table = judge::aggregate_taxonomy(labels, d);
    const std::string stem = d == FailureDirection::FalseNegative ? "taxonomy_fn" : "taxonomy_fp";
    io::write_file_atomic(dir / (stem + ".csv"), judge::taxonomy_csv(table));
    io::write_file_atomic(dir / (stem + ".md"), judge::taxonomy_markdown(table));
  }
  say(std::to_string(labels.size()) + " failures labelled -> " + dir.string());
}

struct ReportArgs {
  std::vector<std::string> summaries;
  std::vector<std::string> comparisons;
  bool baseline = false;
  bool svg = false;
};

void cmd_report(const config::ProjectConfig& cfg, const ReportArgs& a) {
  if (a.summaries.empty() && !a.baseline)
    throw CLI::ValidationError("--summary", "give at least one --summary file or --baseline");
  std::vector<report::ModelAccuracy> models;
  if (a.baseline) {
    auto base = report::load_models(report::baseline_fixture_path());
    models.insert(models.end(), base.begin(), base.end());
  }
  for (const auto& s : a.summaries) {
    auto more = report::load_models(s);
    models.insert(models.end(), more.begin(), more.end());
  }
  std::vector<report::Comparison> comparisons;
  for (const auto& c : a.comparisons) {
    auto more = report::load_comparisons(c);
    comparisons.insert(comparisons.end(), more.begin(), more.end());
  }
  const fs::path dir = fresh_output_dir(cfg.output_root, "report");
  const auto files = report::emit_report(models, comparisons, dir, {a.svg});
  say(std::to_string(models.size()) + " model(s), " + std::to_string(files.size()) + " files -> " + dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification benchmark pipeline: corpus ingest, holdout curation, prompting, model runs, scoring and reports"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Project config (TOML)")->required();

  auto* ingest = app.add_subcommand("ingest", "Parse and filter task definitions from the corpus roots");

  CurateArgs curate_args;
  auto* curate = app.add_subcommand("curate", "Draw the stratified holdout");
  curate->add_option("--tasks", curate_args.tasks, "tasks.jsonl (default: latest ingest)");
  curate->add_option("--seed", curate_args.seed, "Sampling seed (overrides the config)");
  curate->add_option("--per-property", curate_args.per_property, "Tasks per property")->check(CLI::PositiveNumber);
  curate->add_flag("--relax-bins", curate_args.relax, "Cover bin shortfalls from neighbouring bins");

  PromptArgs prompt_args;
  auto* prompt = app.add_subcommand("prompt", "Render prompts for the holdout");
  prompt->add_option("--holdout", prompt_args.holdout, "Holdout directory (default: latest curate)");
  prompt->add_option("--templates", prompt_args.templates, "Template directory")->check(CLI::ExistingDirectory);
  prompt->add_option("--fewshot-bug", prompt_args.fewshot_bug, "Worked-example trace of a buggy program")
      ->check(CLI::ExistingFile);
  prompt->add_option("--fewshot-safe", prompt_args.fewshot_safe, "Worked-example trace of a correct program")
      ->check(CLI::ExistingFile);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Query a model endpoint for every prompt and run");
  run->add_option("--endpoint", run_args.endpoint, "Endpoint name in the registry")->required();
  run->add_option("--prompts", run_args.prompts, "prompts.jsonl (default: latest prompt)");
  run->add_option("--log", run_args.log, "Record log (default: <output>/runs/<endpoint>/records.jsonl)");
  run->add_option("--runs", run_args.runs, "Runs per task")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--parallelism", run_args.parallelism, "Concurrent requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--max-output-tokens", run_args.max_output_tokens,
                  "Output budget per request (default 8192; 24576 for the extended budget)")
      ->check(CLI::PositiveNumber);
  run->add_option("--max-input-tokens", run_args.max_input_tokens, "Context limit for prompts")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score a record log against the holdout");
  score->add_option("--endpoint", score_args.endpoint, "Endpoint whose default log to score");
  score->add_option("--log", score_args.log, "Record log to score");
  score->add_option("--holdout", score_args.holdout, "Holdout directory (default: latest curate)");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Paired t-test and McNemar test between two models");
  compare->add_option("--endpoint-a", compare_args.endpoint_a, "First endpoint");
  compare->add_option("--endpoint-b", compare_args.endpoint_b, "Second endpoint");
  compare->add_option("--log-a", compare_args.log_a, "First record log");
  compare->add_option("--log-b", compare_args.log_b, "Second record log");
  compare->add_option("--holdout", compare_args.holdout, "Holdout directory (default: latest curate)");

  const std::vector<std::string> formats = {"html", "plain", "stripped"};
  const std::vector<std::string> preset_names = {"manifest-only", "expanded", "filtered", "all", "balanced", "mixed"};

  auto* traces_cmd = app.add_subcommand("traces", "Symbolic-execution trace tools");
  traces_cmd->require_subcommand(1);
  std::vector<std::string> trace_inputs;
  std::string trace_store_flag;
  auto* classify = traces_cmd->add_subcommand("classify", "Classify traces by outcome");
  classify->add_option("--input", trace_inputs, "HTML trace files (default: the trace store)")->check(CLI::ExistingFile);
  classify->add_option("--store", trace_store_flag, "Trace store directory");

  std::string convert_format = "plain";
  auto* convert = traces_cmd->add_subcommand("convert", "Convert HTML traces to another format");
  convert->add_option("--input", trace_inputs, "HTML trace files")->required()->check(CLI::ExistingFile);
  convert->add_option("--format", convert_format, "html, plain or stripped")
      ->check(CLI::IsMember(formats, CLI::ignore_case));

  ComposeArgs compose_args;
  auto add_compose_flags = [&](CLI::App* sub) {
    sub->add_option("--store", compose_args.store, "Trace store directory");
    sub->add_option("--preset", compose_args.preset, "Corpus preset")
        ->capture_default_str()
        ->check(CLI::IsMember(preset_names, CLI::ignore_case));
    sub->add_option("--seed", compose_args.seed, "Sampling seed")->capture_default_str();
    sub->add_option("--manifest-count", compose_args.manifest_count, "Manifest traces for expanded/mixed")
        ->capture_default_str();
    sub->add_option("--latent-count", compose_args.latent_count, "Latent traces for mixed")->capture_default_str();
    sub->add_option("--format", compose_args.format, "html, plain or stripped")
        ->check(CLI::IsMember(formats, CLI::ignore_case));
  };
  auto* compose = traces_cmd->add_subcommand("compose", "Select a training corpus from the trace store");
  add_compose_flags(compose);
  auto* pack = traces_cmd->add_subcommand("pack", "Select and pack a training corpus into one file");
  add_compose_flags(pack);
  pack->add_flag("--prepend-source", compose_args.prepend_source, "Put the C source ahead of each trace");
  pack->add_flag("--drop-verdict", compose_args.drop_verdict, "Remove manifest-verdict lines");

  JudgeArgs judge_args;
  auto* judge = app.add_subcommand("judge", "Label failure modes of one run with a judge model");
  judge->add_option("--endpoint", judge_args.endpoint, "Judge endpoint name")->required();
  judge->add_option("--model", judge_args.model, "Evaluated endpoint whose default log to use");
  judge->add_option("--log", judge_args.log, "Evaluated record log");
  judge->add_option("--holdout", judge_args.holdout, "Holdout directory (default: latest curate)");
  judge->add_option("--run-index", judge_args.run_index, "Run to label")->capture_default_str();
  judge->add_option("--parallelism", judge_args.parallelism, "Concurrent judge requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Bar, length-decay, per-property and comparison reports");
  report_cmd->add_option("--summary", report_args.summaries, "summary.json files from score")->check(CLI::ExistingFile);
  report_cmd->add_option("--comparisons", report_args.comparisons, "comparison.json files from compare")
      ->check(CLI::ExistingFile);
  report_cmd->add_flag("--baseline", report_args.baseline, "Include the published baseline accuracies");
  report_cmd->add_flag("--svg", report_args.svg, "Also write SVG charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto cfg = config::load_config(config_path);
    if (*ingest) cmd_ingest(cfg);
    else if (*curate) cmd_curate(cfg, curate_args);
    else if (*prompt) cmd_prompt(cfg, prompt_args);
    else if (*run) return cmd_run(cfg, run_args);
    else if (*score) cmd_score(cfg, score_args);
    else if (*compare) cmd_compare(cfg, compare_args);
    else if (*classify) cmd_traces_classify(cfg, trace_inputs, trace_store_flag);
    else if (*convert) cmd_traces_convert(cfg, trace_inputs, *trace_format_from_string(convert_format));
    else if (*compose) cmd_traces_compose(cfg, compose_args);
    else if (*pack) cmd_traces_pack(cfg, compose_args);
    else if (*judge) cmd_judge(cfg, judge_args);
    else if (*report_cmd) cmd_report(cfg, report_args);
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "svbench: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "svbench: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "svbench: " << e.what() << '\n';
    return 1;
  }
}
