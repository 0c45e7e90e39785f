#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mock_server.hpp"
#include "svbench/config.hpp"
#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/prompts.hpp"
#include "svbench/runner.hpp"

using namespace svbench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome svbench_cli(const std::string& args) {
  const std::string cmd = std::string(SVBENCH_CLI) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.output.append(buf.data(), n);
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("svbench_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<fs::path> subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path only_subdir(const fs::path& dir) {
  const auto all = subdirs(dir);
  REQUIRE(all.size() == 1);
  return all.front();
}

std::string c_program(std::size_t loc) {
  std::string s = "int main(void) {\n";
  for (std::size_t i = 0; i + 2 < loc; ++i) s += "  int v" + std::to_string(i) + " = " + std::to_string(i) + ";\n";
  return s + "}\n";
}

// One SV-COMP-style task per (property, verdict, bin), plus three that the filters must reject.
void write_corpus(const fs::path& root) {
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      for (LengthBin b : kAllBins) {
        const std::string stem = std::string(to_string(v)) + "_" + std::to_string(index_of(b));
        const fs::path dir = root / std::string(to_string(p));
        io::write_file_atomic(dir / (stem + ".c"), c_program(bounds_of(b).lo + 1));
        io::write_file_atomic(dir / (stem + ".yml"),
                              "format_version: '2.0'\ninput_files: '" + stem + ".c'\nproperties:\n  - property_file: ../properties/" +
                                  std::string(svcomp_property_name(p)) + ".prp\n    expected_verdict: " +
                                  (v == Verdict::Holds ? "true" : "false") + "\noptions:\n  language: C\n  data_model: ILP32\n");
      }
  io::write_file_atomic(root / "bad" / "multi.yml",
                        "input_files: ['a.c', 'b.c']\nproperties:\n  - property_file: ../properties/unreach-call.prp\n"
                        "    expected_verdict: true\n");
  io::write_file_atomic(root / "bad" / "custom.c", "#include \"my_defs.h\"\nint main(void) { return 0; }\n");
  io::write_file_atomic(root / "bad" / "custom.yml",
                        "input_files: 'custom.c'\nproperties:\n  - property_file: ../properties/unreach-call.prp\n"
                        "    expected_verdict: true\n");
  io::write_file_atomic(root / "bad" / "listed.c", "int main(void) { return 0; }\n");
  io::write_file_atomic(root / "bad" / "listed.yml",
                        "input_files: 'listed.c'\nproperties:\n  - property_file: ../properties/unreach-call.prp\n"
                        "    expected_verdict: true\n");
}

// Model "mock-a" answers by prompt hash; "mock-b" always answers OKAY.
testgen::MockReply model_reply(const std::string& prompt, const json& body) {
  if (prompt.find("Classify the main reason") != std::string::npos) {
    testgen::MockReply r;
    r.content = "The model ignored a boundary case.\nCategory: Superficial";
    return r;
  }
  if (body.at("model") == "mock-b") {
    testgen::MockReply r;
    r.content = "Looks fine.\nFinal answer: OKAY";
    return r;
  }
  return testgen::deterministic_reply(prompt);
}

struct Workspace {
  fs::path dir;
  fs::path config;
};

Workspace make_workspace(const std::string& name, const std::string& base_url) {
  Workspace w{scratch(name), {}};
  write_corpus(w.dir / "bench");
  io::write_file_atomic(w.dir / "lists" / "invalid_files.txt", "# excluded sources\nbad/listed.c\n");
  io::write_file_atomic(w.dir / "endpoints.toml", "[[endpoint]]\nname = \"mock-a\"\nbase_url = \"" + base_url +
                                                       "\"\n\n[[endpoint]]\nname = \"mock-b\"\nbase_url = \"" +
                                                       base_url + "\"\n\n[[endpoint]]\nname = \"judge\"\nbase_url = \"" +
                                                       base_url + "\"\n");
  fs::create_directories(w.dir / "traces");
  const std::string c3 = io::read_file(prompts::data_dir() / "traces" / "c3_excerpt.html");
  io::write_file_atomic(w.dir / "traces" / "t1.html", c3);
  io::write_file_atomic(w.dir / "traces" / "t2.html", c3);
  io::write_file_atomic(w.dir / "traces" / "t3.html", "<div class=\"log-msg\">Execution finished.</div>\n");
  w.config = w.dir / "project.toml";
  io::write_file_atomic(w.config,
                        "output_root = \"out\"\nendpoints = \"endpoints.toml\"\ntrace_store = \"traces\"\n\n[corpus]\n"
                        "roots = [\"bench\"]\ninvalid_files = [\"lists/invalid_files.txt\"]\n\n[holdout]\n"
                        "per_property = 10\nseed = 7\n");
  return w;
}

std::string cfg_arg(const Workspace& w) { return "--config " + w.config.string(); }

}  // namespace

TEST_CASE("ingest, curate, prompt, run and score end to end against the mock server") {
  testgen::MockServer server(model_reply);
  const auto w = make_workspace("e2e", server.base_url());
  const fs::path out = w.dir / "out";

  auto r = svbench_cli(cfg_arg(w) + " ingest");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path ingest_dir = only_subdir(out / "ingest");
  CHECK(io::read_jsonl(ingest_dir / "tasks.jsonl").size() == 50);
  std::map<std::string, int> reasons;
  for (const auto& j : io::read_jsonl(ingest_dir / "rejections.jsonl")) ++reasons[j.at("reason").get<std::string>()];
  CHECK(reasons["MultiFileTask"] == 1);
  CHECK(reasons["CustomHeader"] == 1);
  CHECK(reasons["InvalidFile"] == 1);

  r = svbench_cli(cfg_arg(w) + " curate");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path holdout_dir = only_subdir(out / "curate");
  const auto holdout = io::read_jsonl(holdout_dir / "holdout.jsonl");
  CHECK(holdout.size() == 50);

  r = svbench_cli(cfg_arg(w) + " prompt");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const auto prompt_rows = io::read_jsonl(only_subdir(out / "prompt") / "prompts.jsonl");
  CHECK(prompt_rows.size() == 50);

  r = svbench_cli(cfg_arg(w) + " run --endpoint mock-a --runs 2 --parallelism 4");
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(server.requests() == 100);
  const fs::path log = out / "runs" / "mock-a" / "records.jsonl";
  CHECK(runner::read_records(log).size() == 100);

  // a rerun resumes and sends nothing
  r = svbench_cli(cfg_arg(w) + " run --endpoint mock-a --runs 2");
  REQUIRE(r.code == 0);
  CHECK(server.requests() == 100);
  CHECK(runner::read_records(log).size() == 100);

  r = svbench_cli(cfg_arg(w) + " score --endpoint mock-a");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path score_dir = only_subdir(out / "score" / "mock-a");
  const std::string csv = io::read_file(score_dir / "summary.csv");
  CHECK(csv.rfind("scope,property,bin,verdict,mean,std,runs\n", 0) == 0);

  // independent tally: the mock's answer for each prompt against the holdout verdicts
  std::map<std::string, std::string> expected;
  for (const auto& t : holdout) expected[t.at("id")] = t.at("expected");
  std::array<int, 2> correct{}, total{};
  for (const auto& p : prompt_rows) {
    const std::string reply = testgen::deterministic_reply(p.at("text").get<std::string>()).content;
    const bool says_error = reply.find("ERROR") != std::string::npos;
    const bool holds = expected.at(p.at("task_id")) == "Holds";
    total[holds ? 0 : 1] += 1;
    correct[holds ? 0 : 1] += (holds != says_error);
  }
  const auto summary = json::parse(io::read_file(score_dir / "summary.json"));
  CHECK(summary.at("endpoint") == "mock-a");
  CHECK(summary["holds"]["mean"].get<double>() == doctest::Approx(100.0 * correct[0] / total[0]));
  CHECK(summary["violated"]["mean"].get<double>() == doctest::Approx(100.0 * correct[1] / total[1]));
  CHECK(summary["holds"]["std"].get<double>() == doctest::Approx(0.0));  // identical prompts, identical answers

  // second model, comparison, judge and a report built from the outputs
  REQUIRE(svbench_cli(cfg_arg(w) + " run --endpoint mock-b --runs 2").code == 0);
  REQUIRE(svbench_cli(cfg_arg(w) + " score --endpoint mock-b").code == 0);
  r = svbench_cli(cfg_arg(w) + " compare --endpoint-a mock-a --endpoint-b mock-b");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path cmp_dir = only_subdir(out / "compare");
  const auto cmp = json::parse(io::read_file(cmp_dir / "comparison.json"));
  REQUIRE(cmp.size() == 1);
  CHECK(cmp[0].contains("t_test"));
  CHECK(cmp[0].contains("mcnemar"));

  const std::size_t before_judge = server.requests();
  r = svbench_cli(cfg_arg(w) + " judge --endpoint judge --model mock-b --parallelism 2");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const auto labels = io::read_jsonl(only_subdir(out / "judge") / "labels.jsonl");
  CHECK(labels.size() == static_cast<std::size_t>(total[1]));  // mock-b misses every violated task
  CHECK(server.requests() - before_judge == labels.size());
  for (const auto& l : labels) CHECK(l.at("direction") == "FalseNegative");

  r = svbench_cli(cfg_arg(w) + " report --svg --summary " + (score_dir / "summary.json").string() + " --summary " +
                  (only_subdir(out / "score" / "mock-b") / "summary.json").string() + " --comparisons " +
                  (cmp_dir / "comparison.json").string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path report_dir = only_subdir(out / "report");
  const std::string md = io::read_file(report_dir / "report.md");
  CHECK(md.find("## Comparisons") != std::string::npos);
  CHECK(md.find("mock-a") != std::string::npos);
  CHECK(md.find("mock-b") != std::string::npos);
  CHECK(fs::exists(report_dir / "bars.svg"));

  // re-running a stage adds a new directory and leaves the old one alone
  const std::string old_tasks = io::read_file(ingest_dir / "tasks.jsonl");
  REQUIRE(svbench_cli(cfg_arg(w) + " ingest").code == 0);
  CHECK(subdirs(out / "ingest").size() == 2);
  CHECK(io::read_file(ingest_dir / "tasks.jsonl") == old_tasks);
}

TEST_CASE("score with an empty record log exits 1 and names the log") {
  testgen::MockServer server(model_reply);
  const auto w = make_workspace("empty", server.base_url());
  REQUIRE(svbench_cli(cfg_arg(w) + " ingest").code == 0);
  REQUIRE(svbench_cli(cfg_arg(w) + " curate").code == 0);
  const fs::path log = w.dir / "out" / "runs" / "mock-a" / "records.jsonl";
  io::write_file_atomic(log, "");
  const auto r = svbench_cli(cfg_arg(w) + " score --endpoint mock-a");
  CHECK(r.code == 1);
  CHECK(r.output.find(log.string()) != std::string::npos);
  CHECK(server.requests() == 0);
}

TEST_CASE("usage errors exit 2 and name the flag") {
  const auto w = make_workspace("usage", "http://127.0.0.1:9/v1");
  auto r = svbench_cli(cfg_arg(w) + " run");
  CHECK(r.code == 2);
  CHECK(r.output.find("--endpoint") != std::string::npos);
  r = svbench_cli(cfg_arg(w) + " run --endpoint mock-a --runs zero");
  CHECK(r.code == 2);
  CHECK(r.output.find("--runs") != std::string::npos);
  r = svbench_cli(cfg_arg(w) + " traces pack --preset nonsense");
  CHECK(r.code == 2);
  CHECK(r.output.find("--preset") != std::string::npos);
  r = svbench_cli(cfg_arg(w) + " report");
  CHECK(r.code == 2);
  r = svbench_cli("ingest");
  CHECK(r.code == 2);
  CHECK(r.output.find("--config") != std::string::npos);
  r = svbench_cli(cfg_arg(w));
  CHECK(r.code == 2);
}

TEST_CASE("missing configured paths fail fast with the path named") {
  const auto w = make_workspace("missing", "http://127.0.0.1:9/v1");
  fs::remove_all(w.dir / "lists");
  const auto r = svbench_cli(cfg_arg(w) + " ingest");
  CHECK(r.code == 1);
  CHECK(r.output.find("invalid_files.txt") != std::string::npos);
  CHECK_FALSE(fs::exists(w.dir / "out" / "ingest"));

  io::write_file_atomic(w.dir / "broken.toml", "output_root = [\n");
  CHECK(svbench_cli("--config " + (w.dir / "broken.toml").string() + " ingest").code == 1);
  CHECK(svbench_cli("--config " + (w.dir / "absent.toml").string() + " ingest").code == 1);
}

TEST_CASE("domain errors exit 1") {
  const auto w = make_workspace("domain", "http://127.0.0.1:9/v1");
  // no holdout yet
  auto r = svbench_cli(cfg_arg(w) + " score --endpoint mock-a");
  CHECK(r.code == 1);
  // unknown endpoint
  REQUIRE(svbench_cli(cfg_arg(w) + " ingest").code == 0);
  REQUIRE(svbench_cli(cfg_arg(w) + " curate").code == 0);
  REQUIRE(svbench_cli(cfg_arg(w) + " prompt").code == 0);
  r = svbench_cli(cfg_arg(w) + " run --endpoint nobody");
  CHECK(r.code == 1);
  CHECK(r.output.find("nobody") != std::string::npos);
  // holdout larger than the supply
  r = svbench_cli(cfg_arg(w) + " curate --per-property 40");
  CHECK(r.code == 1);
}

TEST_CASE("traces subcommands classify, convert, compose and pack") {
  const auto w = make_workspace("traces", "http://127.0.0.1:9/v1");
  const fs::path out = w.dir / "out" / "traces";

  auto r = svbench_cli(cfg_arg(w) + " traces classify");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const std::string classes = io::read_file(only_subdir(out / "classify") / "classes.csv");
  CHECK(classes == "source,class\nt1,ManifestBug\nt2,ManifestBug\nt3,NoViolation\n");

  r = svbench_cli(cfg_arg(w) + " traces convert --format plain --input " + (w.dir / "traces" / "t1.html").string());
  REQUIRE(r.code == 0);
  CHECK(io::read_file(only_subdir(out / "convert") / "t1.txt") ==
        io::read_file(prompts::data_dir() / "traces" / "c3_excerpt.txt"));

  r = svbench_cli(cfg_arg(w) + " traces compose --preset manifest-only --seed 3");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const auto sel = json::parse(io::read_file(only_subdir(out / "compose") / "selection.json"));
  CHECK(sel.at("document_count") == 2);

  r = svbench_cli(cfg_arg(w) + " traces pack --preset filtered --format plain --seed 3");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path pack_dir = only_subdir(out / "pack");
  CHECK(fs::exists(pack_dir / "corpus.txt"));
  CHECK(fs::exists(pack_dir / "corpus.txt.manifest.json"));

  r = svbench_cli(cfg_arg(w) + " traces compose --preset balanced --seed 3");
  CHECK(r.code == 1);  // two manifest traces, only one no-violation trace
}

TEST_CASE("report on the shipped baseline orders bars by overall accuracy") {
  const auto w = make_workspace("baseline", "http://127.0.0.1:9/v1");
  const auto r = svbench_cli(cfg_arg(w) + " report --baseline --svg");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const fs::path dir = only_subdir(w.dir / "out" / "report");
  std::istringstream bars(io::read_file(dir / "bars.csv"));
  std::string header, first, second;
  std::getline(bars, header);
  std::getline(bars, first);
  std::getline(bars, second);
  CHECK(first.rfind("1,Claude Opus 4.7,98.3,0.2,92.0,0.6,", 0) == 0);
  CHECK(second.rfind("2,Kimi K2.5,", 0) == 0);
  const std::string svg = io::read_file(dir / "bars.svg");
  CHECK(svg.find("Claude Opus 4.7") < svg.find("Ministral 3 8B"));
}

TEST_CASE("config parsing resolves paths against the config directory") {
  const auto cfg = config::parse_config(
      "output_root = \"results\"\nendpoints = \"/abs/endpoints.toml\"\n[corpus]\nroots = \"c\"\n"
      "invalid_tasks = [\"a.txt\", \"sub/../b.txt\"]\n[holdout]\nper_property = 20\nholds_fraction = 0.4\nseed = 9\n"
      "relax_bins = true\n",
      "/base/dir");
  CHECK(cfg.output_root == fs::path("/base/dir/results"));
  CHECK(*cfg.endpoint_registry == fs::path("/abs/endpoints.toml"));
  REQUIRE(cfg.corpus_roots.size() == 1);
  CHECK(cfg.corpus_roots[0] == fs::path("/base/dir/c"));
  CHECK(cfg.invalid_task_lists == std::vector<fs::path>{"/base/dir/a.txt", "/base/dir/b.txt"});
  CHECK(cfg.holdout.per_property == 20);
  CHECK(cfg.holdout.holds_fraction == 0.4);
  CHECK(cfg.holdout.seed == 9);
  CHECK(cfg.relax_bins);
  CHECK_FALSE(cfg.trace_store.has_value());

  const auto defaults = config::parse_config("", "/w");
  CHECK(defaults.output_root == fs::path("/w/out"));
  CHECK(defaults.holdout.per_property == 100);

  auto code = [](const std::string& text) {
    try {
      config::parse_config(text, "/w");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("[holdout]\nper_property = 0\n") == ErrorCode::Config);
  CHECK(code("[holdout]\nholds_fraction = 2.0\n") == ErrorCode::Config);
  CHECK(code("[corpus]\nroots = 3\n") == ErrorCode::Config);
  CHECK(code("output_root = [\n") == ErrorCode::Config);
}
