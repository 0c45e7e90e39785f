#include "svbench/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/parallel.hpp"

namespace svbench {

FailureDirection direction_of(const FailureLabel& label) {
  return std::holds_alternative<FnCategory>(label) ? FailureDirection::FalseNegative : FailureDirection::FalsePositive;
}

std::size_t category_index(const FailureLabel& label) {
  return std::visit([](auto c) { return static_cast<std::size_t>(c); }, label);
}

std::string_view to_string(FailureDirection d) {
  return d == FailureDirection::FalseNegative ? "FalseNegative" : "FalsePositive";
}

std::optional<FailureDirection> failure_direction_from_string(std::string_view s) {
  if (s == "FalseNegative" || s == "FN" || s == "fn") return FailureDirection::FalseNegative;
  if (s == "FalsePositive" || s == "FP" || s == "fp") return FailureDirection::FalsePositive;
  return std::nullopt;
}

std::optional<FailureCase> make_failure_case(std::string task_id, std::size_t run_index, Property property,
                                             Verdict expected, ParsedVerdict predicted, std::string response) {
  const bool fn = expected == Verdict::Violated && predicted == ParsedVerdict::Holds;
  const bool fp = expected == Verdict::Holds && predicted == ParsedVerdict::Violated;
  if (!fn && !fp) return std::nullopt;
  FailureCase c;
  c.task_id_ = std::move(task_id);
  c.run_index_ = run_index;
  c.property_ = property;
  c.expected_ = expected;
  c.predicted_ = predicted;
  c.response_ = std::move(response);
  return c;
}

}  // namespace svbench

namespace svbench::judge {

namespace {

FailureLabel label_at(FailureDirection d, std::size_t i) {
  if (d == FailureDirection::FalseNegative) return static_cast<FnCategory>(i);
  return static_cast<FpCategory>(i);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

const std::string& builtin_prompt_template() {
  static const std::string t = io::read_file(prompts::data_dir() / "judge" / "prompt.txt");
  return t;
}

}  // namespace

CategoryCatalog CategoryCatalog::load(const std::filesystem::path& json_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, json_path.string() + ": " + e.what());
  }
  static constexpr std::array<std::array<std::string_view, 5>, 2> kTokens = {{
      {"MissedEdgeCase", "IdentifiedButDismissed", "IncorrectReasoning", "QuantifierConfusion", "Superficial"},
      {"IncorrectReasoning", "MisunderstoodSpec", "FabricatedBug", "OverlyConservative", "Superficial"},
  }};
  CategoryCatalog cat;
  for (FailureDirection d : {FailureDirection::FalseNegative, FailureDirection::FalsePositive}) {
    const auto key = std::string(to_string(d));
    if (!doc.contains(key) || !doc.at(key).is_array() || doc.at(key).size() != 5)
      throw Error(ErrorCode::Config, json_path.string() + ": '" + key + "' must list five categories");
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& j = doc.at(key).at(i);
      Category c;
      try {
        c.token = j.at("token").get<std::string>();
        c.name = j.at("name").get<std::string>();
        c.definition = j.at("definition").get<std::string>();
        if (j.contains("aliases")) c.aliases = j.at("aliases").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, json_path.string() + ": " + e.what());
      }
      const auto want = kTokens[static_cast<std::size_t>(d)][i];
      if (c.token != want)
        throw Error(ErrorCode::Config,
                    json_path.string() + ": expected category " + std::string(want) + " at position " + std::to_string(i));
      cat.sets_[static_cast<std::size_t>(d)][i] = std::move(c);
    }
  }
  return cat;
}

const CategoryCatalog& CategoryCatalog::builtin() {
  static const CategoryCatalog c = load(prompts::data_dir() / "judge" / "categories.json");
  return c;
}

const Category& CategoryCatalog::category(const FailureLabel& label) const {
  return sets_[static_cast<std::size_t>(direction_of(label))][category_index(label)];
}

std::vector<FailureCase> select_failures(const Scoreboard& board, std::size_t run_index) {
  if (run_index >= board.n_runs)
    throw Error(ErrorCode::OutOfRange,
                "run " + std::to_string(run_index) + " not in board with " + std::to_string(board.n_runs) + " runs");
  std::vector<FailureCase> fn, fp;
  for (std::size_t k : board.by_run[run_index]) {
    const auto& o = board.outcomes[k];
    if (!o.evaluated || o.correct) continue;
    auto c = make_failure_case(o.task_id, o.run_index, o.property, o.expected, o.predicted, board.records[k].raw_response);
    if (!c) continue;
    (c->direction() == FailureDirection::FalseNegative ? fn : fp).push_back(std::move(*c));
  }
  auto by_id = [](const FailureCase& a, const FailureCase& b) { return a.task_id() < b.task_id(); };
  std::sort(fn.begin(), fn.end(), by_id);
  std::sort(fp.begin(), fp.end(), by_id);
  fn.insert(fn.end(), std::make_move_iterator(fp.begin()), std::make_move_iterator(fp.end()));
  return fn;
}

JudgePrompt build_judge_prompt(const FailureCase& failure, const VerificationTask& task,
                               const CategoryCatalog& catalog, const std::string& prompt_template) {
  std::string categories;
  for (const auto& c : catalog.categories(failure.direction()))
    categories += "- " + c.token + " (" + c.name + "): " + c.definition + "\n";
  if (!categories.empty()) categories.pop_back();

  const bool fn = failure.direction() == FailureDirection::FalseNegative;
  JudgePrompt out;
  out.degenerate = failure.response_text().find_first_not_of(" \t\r\n") == std::string::npos;
  out.prompt.task_id = failure.task_id();
  out.prompt.text = prompts::fill_placeholders(
      prompt_template,
      {{"property", std::string(to_string(task.property))},
       {"ground_truth", fn ? "the property is violated (ERROR)" : "the property holds (OKAY)"},
       {"model_answer", fn ? "OKAY" : "ERROR"},
       {"direction", fn ? "false negative (a real violation was missed)" : "false positive (a violation was reported where none exists)"},
       {"c_code", task.c_source},
       {"response", failure.response_text()},
       {"categories", categories}});
  out.prompt.estimated_tokens = prompts::estimate_tokens(out.prompt.text);
  return out;
}

JudgePrompt build_judge_prompt(const FailureCase& failure, const VerificationTask& task, const CategoryCatalog& catalog) {
  return build_judge_prompt(failure, task, catalog, builtin_prompt_template());
}

std::optional<FailureLabel> parse_judge_label(std::string_view text, FailureDirection direction,
                                              const CategoryCatalog& catalog) {
  const std::string hay = lower(text);
  std::optional<std::size_t> best;
  std::size_t best_pos = 0, best_len = 0;
  const auto& cats = catalog.categories(direction);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    std::vector<std::string> needles = {lower(cats[i].token), lower(cats[i].name)};
    for (const auto& a : cats[i].aliases) needles.push_back(lower(a));
    for (const auto& n : needles) {
      if (n.empty()) continue;
      for (auto pos = hay.find(n); pos != std::string::npos; pos = hay.find(n, pos + 1)) {
        const bool left = pos == 0 || !is_alnum(hay[pos - 1]);
        const bool right = pos + n.size() >= hay.size() || !is_alnum(hay[pos + n.size()]);
        if (!left || !right) continue;
        if (!best || pos > best_pos || (pos == best_pos && n.size() > best_len)) {
          best = i;
          best_pos = pos;
          best_len = n.size();
        }
      }
    }
  }
  if (!best) return std::nullopt;
  return label_at(direction, *best);
}

nlohmann::json to_json(const LabeledCase& c) {
  nlohmann::json j = {{"task_id", c.task_id},
                      {"run_index", c.run_index},
                      {"property", to_string(c.property)},
                      {"direction", to_string(c.direction)},
                      {"judge_response", c.judge_response}};
  j["label"] = c.label ? nlohmann::json(CategoryCatalog::builtin().category(*c.label).token) : nlohmann::json("Unparseable");
  return j;
}

LabeledCase labeled_case_from_json(const nlohmann::json& j) {
  try {
    LabeledCase c;
    c.task_id = j.at("task_id").get<std::string>();
    c.run_index = j.at("run_index").get<std::size_t>();
    const auto prop = property_from_string(j.at("property").get<std::string>());
    const auto dir = failure_direction_from_string(j.at("direction").get<std::string>());
    if (!prop || !dir) throw Error(ErrorCode::InvalidArgument, "bad property or direction in label record");
    c.property = *prop;
    c.direction = *dir;
    c.judge_response = j.value("judge_response", "");
    const auto label = j.at("label").get<std::string>();
    if (label != "Unparseable") {
      const auto& cats = CategoryCatalog::builtin().categories(c.direction);
      for (std::size_t i = 0; i < cats.size(); ++i)
        if (cats[i].token == label) c.label = label_at(c.direction, i);
      if (!c.label) throw Error(ErrorCode::InvalidArgument, "unknown category " + label);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad label record: ") + e.what());
  }
}

std::vector<LabeledCase> run_judge(runner::Adapter& adapter, const ModelEndpoint& judge_endpoint,
                                   std::span<const FailureCase> cases, std::span<const VerificationTask> tasks,
                                   const JudgeOptions& options, const CategoryCatalog& catalog) {
  std::map<std::string_view, const VerificationTask*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.id, &t);
  std::vector<const VerificationTask*> resolved;
  for (const auto& c : cases) {
    auto it = by_id.find(c.task_id());
    if (it == by_id.end()) throw Error(ErrorCode::UnknownTask, "failure case for unknown task " + c.task_id());
    resolved.push_back(it->second);
  }
  std::vector<LabeledCase> out(cases.size());
  parallel_for(cases.size(), options.parallelism, [&](std::size_t i) {
    const auto& c = cases[i];
    const auto prompt = build_judge_prompt(c, *resolved[i], catalog);
    LabeledCase l;
    l.task_id = c.task_id();
    l.run_index = c.run_index();
    l.property = c.property();
    l.direction = c.direction();
    const auto rec = runner::execute_task(adapter, judge_endpoint, prompt.prompt, options.runner);
    if (rec.status == RunStatus::Ok) {
      l.judge_response = rec.raw_response;
      l.label = parse_judge_label(rec.raw_response, c.direction(), catalog);
    }
    out[i] = std::move(l);
  });
  return out;
}

std::size_t TaxonomyTable::row_total(Property p) const {
  const auto& row = counts[index_of(p)];
  return std::accumulate(row.begin(), row.end(), std::size_t{0}) + unparseable[index_of(p)];
}

std::size_t TaxonomyTable::column_total(std::size_t category) const {
  std::size_t n = 0;
  for (const auto& row : counts) n += row[category];
  return n;
}

std::size_t TaxonomyTable::unparseable_total() const {
  return std::accumulate(unparseable.begin(), unparseable.end(), std::size_t{0});
}

std::size_t TaxonomyTable::total() const {
  std::size_t n = unparseable_total();
  for (std::size_t c = 0; c < 5; ++c) n += column_total(c);
  return n;
}

double TaxonomyTable::share(std::size_t category) const {
  const auto t = total();
  return t ? 100.0 * static_cast<double>(column_total(category)) / static_cast<double>(t) : 0.0;
}

double TaxonomyTable::unparseable_share() const {
  const auto t = total();
  return t ? 100.0 * static_cast<double>(unparseable_total()) / static_cast<double>(t) : 0.0;
}

TaxonomyTable aggregate_taxonomy(std::span<const LabeledCase> labels, FailureDirection direction) {
  TaxonomyTable t;
  t.direction = direction;
  for (const auto& l : labels) {
    if (l.direction != direction) continue;
    if (!l.label) {
      ++t.unparseable[index_of(l.property)];
      continue;
    }
    if (direction_of(*l.label) != direction)
      throw Error(ErrorCode::InvalidArgument, "label direction disagrees with case " + l.task_id);
    ++t.counts[index_of(l.property)][category_index(*l.label)];
  }
  return t;
}

std::string_view property_row_label(Property p) {
  switch (p) {
    case Property::MemorySafety: return "Mem. Safety";
    case Property::NoOverflow: return "Overflow";
    case Property::Termination: return "Termination";
    case Property::Reachability: return "Reachability";
    case Property::NoDataRace: return "Data Race";
  }
  return "?";
}

namespace {
std::string with_share(std::size_t n, double share) {
  return std::to_string(n) + " (" + std::to_string(std::lround(share)) + "%)";
}
}  // namespace

std::string taxonomy_csv(const TaxonomyTable& t, const CategoryCatalog& catalog) {
  std::ostringstream os;
  const auto& cats = catalog.categories(t.direction);
  os << "direction,property";
  for (const auto& c : cats) os << ',' << c.token;
  os << ",Unparseable,Total\n";
  for (Property p : kAllProperties) {
    os << to_string(t.direction) << ',' << to_string(p);
    for (std::size_t c = 0; c < 5; ++c) os << ',' << t.counts[index_of(p)][c];
    os << ',' << t.unparseable[index_of(p)] << ',' << t.row_total(p) << '\n';
  }
  os << to_string(t.direction) << ",Total";
  for (std::size_t c = 0; c < 5; ++c) os << ',' << t.column_total(c);
  os << ',' << t.unparseable_total() << ',' << t.total() << '\n';
  os << to_string(t.direction) << ",SharePercent";
  for (std::size_t c = 0; c < 5; ++c) os << ',' << t.share(c);
  os << ',' << t.unparseable_share() << ',' << (t.total() ? 100 : 0) << '\n';
  return os.str();
}

std::string taxonomy_markdown(const TaxonomyTable& t, const CategoryCatalog& catalog) {
  std::ostringstream os;
  const auto& cats = catalog.categories(t.direction);
  os << "| |";
  for (const auto& c : cats) os << ' ' << c.name << " |";
  os << " Unparseable | Total |\n|---|";
  for (std::size_t c = 0; c < 7; ++c) os << "---:|";
  os << '\n';
  for (Property p : kAllProperties) {
    os << "| " << property_row_label(p) << " |";
    for (std::size_t c = 0; c < 5; ++c) os << ' ' << t.counts[index_of(p)][c] << " |";
    os << ' ' << t.unparseable[index_of(p)] << " | " << t.row_total(p) << " |\n";
  }
  os << "| Total |";
  for (std::size_t c = 0; c < 5; ++c) os << ' ' << with_share(t.column_total(c), t.share(c)) << " |";
  os << ' ' << with_share(t.unparseable_total(), t.unparseable_share()) << " | " << t.total() << " |\n";
  return os.str();
}

}  // namespace svbench::judge
