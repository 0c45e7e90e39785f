#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "svbench/corpus.hpp"
#include "svbench/domain.hpp"

namespace svbench {

struct PromptText {
  std::string task_id;
  std::string text;
  std::size_t estimated_tokens = 0;

  bool operator==(const PromptText&) const = default;
};

nlohmann::json to_json(const PromptText& p);
PromptText prompt_from_json(const nlohmann::json& j);

}  // namespace svbench

namespace svbench::prompts {

using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// ceil(bytes / 4).
std::size_t estimate_tokens(std::string_view text);

/// Fills `{name}` placeholders; `{{` and `}}` render as literal braces.
/// Throws Error{InvalidArgument} for an unknown or unterminated placeholder.
std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Number of times `{name}` occurs as a placeholder (escaped braces excluded).
std::size_t count_placeholder(std::string_view tmpl, std::string_view name);

struct PropertyTexts {
  std::string description;
  std::string instruction;
};

/// Prompt wording loaded from a directory of UTF-8 text files:
///   frame.txt, <Property>.description.txt, <Property>.instruction.txt,
///   fewshot_frame.txt, fewshot_example.txt, informalize.txt
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir);
  /// The templates shipped in data/prompts (or $SVBENCH_DATA_DIR/prompts).
  static const TemplateSet& builtin();

  const std::string& frame() const { return frame_; }
  const PropertyTexts& texts(Property p) const { return texts_[index_of(p)]; }
  const std::string& fewshot_frame() const { return fewshot_frame_; }
  const std::string& fewshot_example() const { return fewshot_example_; }
  const std::string& informalize() const { return informalize_; }

 private:
  std::string frame_;
  std::array<PropertyTexts, 5> texts_;
  std::string fewshot_frame_;
  std::string fewshot_example_;
  std::string informalize_;
};

/// Root of the shipped data directory.
std::filesystem::path data_dir();

/// The clause of a property's instruction that names the property, e.g.
/// "if the program terminates". Distinct across properties.
std::string instruction_sentinel(const TemplateSet& templates, Property p);

PromptText render_prompt(const TemplateSet& templates, const VerificationTask& task,
                         const TokenEstimator& estimator = estimate_tokens);
inline PromptText render_prompt(const VerificationTask& task) {
  return render_prompt(TemplateSet::builtin(), task);
}

/// The standard prompt preceded by a worked-example section holding the
/// non-empty traces (bug example first).
PromptText render_fewshot(const TemplateSet& templates, const VerificationTask& task,
                          std::string_view bug_trace, std::string_view safe_trace,
                          const TokenEstimator& estimator = estimate_tokens);

}  // namespace svbench::prompts
