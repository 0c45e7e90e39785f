#include "svbench/prompts.hpp"

#include <cstdlib>

#include "svbench/error.hpp"
#include "svbench/io.hpp"

namespace svbench {

nlohmann::json to_json(const PromptText& p) {
  return {{"task_id", p.task_id}, {"text", p.text}, {"estimated_tokens", p.estimated_tokens}};
}

PromptText prompt_from_json(const nlohmann::json& j) {
  try {
    return PromptText{j.at("task_id").get<std::string>(), j.at("text").get<std::string>(),
                      j.at("estimated_tokens").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad prompt record: ") + e.what());
  }
}

}  // namespace svbench

namespace svbench::prompts {

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

namespace {

// Walks a template, calling on_text for literal runs and on_name for placeholders.
template <typename OnText, typename OnName>
void walk_template(std::string_view tmpl, OnText on_text, OnName on_name) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t at = tmpl.find_first_of("{}", i);
    if (at == std::string_view::npos) {
      on_text(tmpl.substr(i));
      return;
    }
    on_text(tmpl.substr(i, at - i));
    const char c = tmpl[at];
    if (at + 1 < tmpl.size() && tmpl[at + 1] == c) {
      on_text(tmpl.substr(at, 1));
      i = at + 2;
      continue;
    }
    if (c == '}')
      throw Error(ErrorCode::InvalidArgument, "unmatched '}' in template at offset " + std::to_string(at));
    const std::size_t close = tmpl.find('}', at + 1);
    if (close == std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument, "unterminated placeholder at offset " + std::to_string(at));
    const std::string_view name = tmpl.substr(at + 1, close - at - 1);
    if (name.empty() || name.find_first_of("{ \n") != std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument, "malformed placeholder at offset " + std::to_string(at));
    on_name(name);
    i = close + 1;
  }
}

std::string read_template(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::Config, "missing prompt template " + path.string());
  return io::read_file(path);
}

std::string trim_trailing(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

void require_exactly_once(const std::string& tmpl, std::initializer_list<std::string_view> names,
                          const std::string& file) {
  walk_template(tmpl, [](std::string_view) {}, [&](std::string_view n) {
    bool known = false;
    for (auto k : names) known = known || k == n;
    if (!known)
      throw Error(ErrorCode::Config, file + ": unknown placeholder {" + std::string(n) + "}");
  });
  for (auto n : names) {
    const auto c = count_placeholder(tmpl, n);
    if (c != 1)
      throw Error(ErrorCode::Config, file + ": placeholder {" + std::string(n) + "} appears " +
                                         std::to_string(c) + " times, expected once");
  }
}

}  // namespace

std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  walk_template(tmpl, [&](std::string_view s) { out.append(s); }, [&](std::string_view n) {
    auto it = values.find(std::string(n));
    if (it == values.end())
      throw Error(ErrorCode::InvalidArgument, "no value for placeholder {" + std::string(n) + "}");
    out.append(it->second);
  });
  return out;
}

std::size_t count_placeholder(std::string_view tmpl, std::string_view name) {
  std::size_t n = 0;
  walk_template(tmpl, [](std::string_view) {}, [&](std::string_view p) { n += p == name; });
  return n;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  TemplateSet t;
  t.frame_ = read_template(dir / "frame.txt");
  require_exactly_once(t.frame_, {"property_description", "data_model", "c_code", "property_instruction"},
                       "frame.txt");
  for (Property p : kAllProperties) {
    const std::string stem(to_string(p));
    auto& texts = t.texts_[index_of(p)];
    texts.description = trim_trailing(read_template(dir / (stem + ".description.txt")));
    texts.instruction = trim_trailing(read_template(dir / (stem + ".instruction.txt")));
  }
  t.fewshot_frame_ = read_template(dir / "fewshot_frame.txt");
  require_exactly_once(t.fewshot_frame_, {"examples"}, "fewshot_frame.txt");
  t.fewshot_example_ = read_template(dir / "fewshot_example.txt");
  walk_template(t.fewshot_example_, [](std::string_view) {}, [](std::string_view n) {
    if (n != "index" && n != "label" && n != "trace")
      throw Error(ErrorCode::Config, "fewshot_example.txt: unknown placeholder {" + std::string(n) + "}");
  });
  if (count_placeholder(t.fewshot_example_, "trace") != 1)
    throw Error(ErrorCode::Config, "fewshot_example.txt: {trace} must appear once");
  t.informalize_ = read_template(dir / "informalize.txt");
  require_exactly_once(t.informalize_, {"c_code", "trace"}, "informalize.txt");

  for (Property p : kAllProperties) instruction_sentinel(t, p);  // validates
  return t;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SVBENCH_DATA_DIR"); env && *env) return env;
  return SVBENCH_DATA_DIR;
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = load(data_dir() / "prompts");
  return set;
}

std::string instruction_sentinel(const TemplateSet& templates, Property p) {
  const std::string& ins = templates.texts(p).instruction;
  static constexpr std::string_view kMarker = "\"Final answer: OKAY\" ";
  const auto at = ins.find(kMarker);
  if (at == std::string::npos)
    throw Error(ErrorCode::Config, std::string(to_string(p)) + " instruction lacks the OKAY marker");
  const auto start = at + kMarker.size();
  const auto end = ins.find('.', start);
  if (end == std::string::npos || ins.compare(start, 3, "if ") != 0)
    throw Error(ErrorCode::Config, std::string(to_string(p)) + " instruction lacks an 'if ...' clause");
  return ins.substr(start, end - start);
}

PromptText render_prompt(const TemplateSet& templates, const VerificationTask& task,
                         const TokenEstimator& estimator) {
  const auto& texts = templates.texts(task.property);
  PromptText out;
  out.task_id = task.id;
  out.text = fill_placeholders(templates.frame(), {{"property_description", texts.description},
                                                   {"data_model", std::string(to_string(task.data_model))},
                                                   {"c_code", task.c_source},
                                                   {"property_instruction", texts.instruction}});
  out.estimated_tokens = estimator(out.text);
  return out;
}

PromptText render_fewshot(const TemplateSet& templates, const VerificationTask& task,
                          std::string_view bug_trace, std::string_view safe_trace,
                          const TokenEstimator& estimator) {
  std::string examples;
  int index = 0;
  auto add = [&](std::string_view trace, const char* label) {
    std::string body(trace);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    if (body.empty()) return;
    examples += fill_placeholders(templates.fewshot_example(),
                                  {{"index", std::to_string(++index)}, {"label", label}, {"trace", body}});
  };
  add(bug_trace, "trace of a program with a bug");
  add(safe_trace, "trace of a program without a bug");

  PromptText out = render_prompt(templates, task, estimator);
  out.text = fill_placeholders(templates.fewshot_frame(), {{"examples", examples}}) + out.text;
  out.estimated_tokens = estimator(out.text);
  return out;
}

}  // namespace svbench::prompts
