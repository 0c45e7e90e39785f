#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "svbench/metrics.hpp"
#include "svbench/runner.hpp"

namespace svbench {

enum class FailureDirection { FalseNegative, FalsePositive };
enum class FnCategory { MissedEdgeCase, IdentifiedButDismissed, IncorrectReasoning, QuantifierConfusion, Superficial };
enum class FpCategory { IncorrectReasoning, MisunderstoodSpec, FabricatedBug, OverlyConservative, Superficial };

/// The alternative carries the direction, so a category can never be paired
/// with the wrong one.
using FailureLabel = std::variant<FnCategory, FpCategory>;

FailureDirection direction_of(const FailureLabel& label);
std::size_t category_index(const FailureLabel& label);
std::string_view to_string(FailureDirection d);
std::optional<FailureDirection> failure_direction_from_string(std::string_view s);

/// A parseable wrong answer. Built only through make_failure_case.
class FailureCase {
 public:
  const std::string& task_id() const { return task_id_; }
  std::size_t run_index() const { return run_index_; }
  Property property() const { return property_; }
  Verdict expected() const { return expected_; }
  ParsedVerdict predicted() const { return predicted_; }
  const std::string& response_text() const { return response_; }
  FailureDirection direction() const {
    return expected_ == Verdict::Violated ? FailureDirection::FalseNegative : FailureDirection::FalsePositive;
  }

  friend std::optional<FailureCase> make_failure_case(std::string task_id, std::size_t run_index, Property property,
                                                      Verdict expected, ParsedVerdict predicted, std::string response);

 private:
  FailureCase() = default;
  std::string task_id_;
  std::size_t run_index_ = 0;
  Property property_ = Property::Reachability;
  Verdict expected_ = Verdict::Holds;
  ParsedVerdict predicted_ = ParsedVerdict::Unparseable;
  std::string response_;
};

/// Nothing unless the prediction is parseable and wrong.
std::optional<FailureCase> make_failure_case(std::string task_id, std::size_t run_index, Property property,
                                             Verdict expected, ParsedVerdict predicted, std::string response);

}  // namespace svbench

namespace svbench::judge {

struct Category {
  std::string token;
  std::string name;
  std::vector<std::string> aliases;
  std::string definition;
};

/// Category names, aliases and definitions for both directions, in table order.
class CategoryCatalog {
 public:
  static CategoryCatalog load(const std::filesystem::path& json_path);
  static const CategoryCatalog& builtin();

  const std::array<Category, 5>& categories(FailureDirection d) const { return sets_[static_cast<std::size_t>(d)]; }
  const Category& category(const FailureLabel& label) const;

 private:
  std::array<std::array<Category, 5>, 2> sets_;
};

/// All parseable incorrect outcomes of one run, false negatives first, each
/// group in task-id order. Throws OutOfRange for an unknown run.
std::vector<FailureCase> select_failures(const Scoreboard& board, std::size_t run_index);

struct JudgePrompt {
  PromptText prompt;
  bool degenerate = false;  // empty response text
};

JudgePrompt build_judge_prompt(const FailureCase& failure, const VerificationTask& task,
                               const CategoryCatalog& catalog = CategoryCatalog::builtin());
JudgePrompt build_judge_prompt(const FailureCase& failure, const VerificationTask& task, const CategoryCatalog& catalog,
                               const std::string& prompt_template);

/// Last category mention (token, name or alias, any case) in `text` among the
/// direction's categories.
std::optional<FailureLabel> parse_judge_label(std::string_view text, FailureDirection direction,
                                              const CategoryCatalog& catalog = CategoryCatalog::builtin());

struct LabeledCase {
  std::string task_id;
  std::size_t run_index = 0;
  Property property = Property::Reachability;
  FailureDirection direction = FailureDirection::FalseNegative;
  std::optional<FailureLabel> label;  // absent: judge reply unparseable
  std::string judge_response;
};

nlohmann::json to_json(const LabeledCase& c);
LabeledCase labeled_case_from_json(const nlohmann::json& j);

struct JudgeOptions {
  std::size_t parallelism = 1;
  runner::RunnerOptions runner{1u << 20};
};

/// Sends every case to the judge endpoint and parses its label.
std::vector<LabeledCase> run_judge(runner::Adapter& adapter, const ModelEndpoint& judge_endpoint,
                                   std::span<const FailureCase> cases, std::span<const VerificationTask> tasks,
                                   const JudgeOptions& options = {},
                                   const CategoryCatalog& catalog = CategoryCatalog::builtin());

struct TaxonomyTable {
  FailureDirection direction = FailureDirection::FalseNegative;
  std::array<std::array<std::size_t, 5>, 5> counts{};  // property x category
  std::array<std::size_t, 5> unparseable{};            // per property

  std::size_t row_total(Property p) const;
  std::size_t column_total(std::size_t category) const;
  std::size_t unparseable_total() const;
  std::size_t total() const;
  /// Column share of the grand total, in percent; 0 for an empty table.
  double share(std::size_t category) const;
  double unparseable_share() const;
};

/// Labels of the other direction are ignored.
TaxonomyTable aggregate_taxonomy(std::span<const LabeledCase> labels, FailureDirection direction);

std::string taxonomy_csv(const TaxonomyTable& t, const CategoryCatalog& catalog = CategoryCatalog::builtin());
std::string taxonomy_markdown(const TaxonomyTable& t, const CategoryCatalog& catalog = CategoryCatalog::builtin());

/// Short row label used in the tables, e.g. "Mem. Safety".
std::string_view property_row_label(Property p);

}  // namespace svbench::judge
