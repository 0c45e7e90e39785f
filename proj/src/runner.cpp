#include "svbench/runner.hpp"

#include <httplib.h>
#include <toml.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>

#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/parallel.hpp"

namespace svbench {

namespace {

constexpr std::array<std::string_view, 5> kStatusNames = {"Ok", "Timeout", "ContextExceeded",
                                                          "OutputBudgetExhausted", "TransportError"};

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(RunStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

std::optional<RunStatus> run_status_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i)
    if (kStatusNames[i] == s) return static_cast<RunStatus>(i);
  return std::nullopt;
}

std::string_view to_string(ParsedVerdict v) {
  switch (v) {
    case ParsedVerdict::Holds: return "Holds";
    case ParsedVerdict::Violated: return "Violated";
    case ParsedVerdict::Unparseable: return "Unparseable";
  }
  return "?";
}

nlohmann::json to_json(const ModelEndpoint& e) {
  return {{"name", e.name},
          {"base_url", e.base_url},
          {"auth_ref", e.auth_ref},
          {"decoding",
           {{"temperature", e.decoding.temperature},
            {"max_output_tokens", e.decoding.max_output_tokens},
            {"thinking", e.decoding.thinking}}},
          {"request_timeout", e.request_timeout},
          {"model", e.model},
          {"thinking_open", e.thinking_open},
          {"thinking_close", e.thinking_close},
          {"adapter", e.adapter}};
}

ModelEndpoint endpoint_from_json(const nlohmann::json& j) {
  try {
    ModelEndpoint e;
    e.name = j.at("name").get<std::string>();
    e.base_url = j.at("base_url").get<std::string>();
    e.auth_ref = field_or<std::string>(j, "auth_ref", "");
    if (j.contains("decoding")) {
      const auto& d = j.at("decoding");
      e.decoding.temperature = field_or<double>(d, "temperature", 0.0);
      e.decoding.max_output_tokens = field_or<std::size_t>(d, "max_output_tokens", 8192);
      e.decoding.thinking = field_or<bool>(d, "thinking", false);
    }
    e.request_timeout = field_or<double>(j, "request_timeout", 600.0);
    e.model = field_or<std::string>(j, "model", "");
    e.thinking_open = field_or<std::string>(j, "thinking_open", "<think>");
    e.thinking_close = field_or<std::string>(j, "thinking_close", "</think>");
    e.adapter = field_or<std::string>(j, "adapter", "openai-chat");
    if (e.name.empty()) throw Error(ErrorCode::Config, "endpoint without a name");
    if (e.decoding.max_output_tokens == 0)
      throw Error(ErrorCode::Config, "endpoint " + e.name + ": max_output_tokens must be positive");
    if (!(e.request_timeout > 0))
      throw Error(ErrorCode::Config, "endpoint " + e.name + ": request_timeout must be positive");
    if (e.thinking_open.empty() || e.thinking_close.empty())
      throw Error(ErrorCode::Config, "endpoint " + e.name + ": empty thinking delimiter");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Config, std::string("bad endpoint entry: ") + ex.what());
  }
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j = {{"task_id", r.task_id},
                      {"run_index", r.run_index},
                      {"endpoint_name", r.endpoint_name},
                      {"raw_response", r.raw_response},
                      {"status", to_string(r.status)},
                      {"latency_ms", r.latency_ms},
                      {"prompt_tokens", r.prompt_tokens},
                      {"output_tokens", r.output_tokens}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.run_index = j.at("run_index").get<std::size_t>();
    r.endpoint_name = j.at("endpoint_name").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    const auto status = run_status_from_string(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::InvalidArgument, "unknown run status " + j.at("status").dump());
    r.status = *status;
    r.latency_ms = j.at("latency_ms").get<std::int64_t>();
    r.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    r.output_tokens = j.at("output_tokens").get<std::size_t>();
    r.error = field_or<std::string>(j, "error", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad run record: ") + e.what());
  }
}

}  // namespace svbench

namespace svbench::runner {

std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path) {
  nlohmann::json doc;
  const std::string text = io::read_file(path);
  if (path.extension() == ".json") {
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Config, path.string() + ": " + e.what());
    }
  } else {
    try {
      std::ostringstream os;
      os << toml::json_formatter{toml::parse(text, path.string())};
      doc = nlohmann::json::parse(os.str());
    } catch (const toml::parse_error& e) {
      throw Error(ErrorCode::Config, path.string() + ": " + std::string(e.description()));
    }
  }
  if (!doc.contains("endpoint") || !doc.at("endpoint").is_array())
    throw Error(ErrorCode::Config, path.string() + ": expected an 'endpoint' array");
  std::vector<ModelEndpoint> out;
  std::set<std::string> names;
  for (const auto& j : doc.at("endpoint")) {
    out.push_back(endpoint_from_json(j));
    if (!names.insert(out.back().name).second)
      throw Error(ErrorCode::Config, path.string() + ": duplicate endpoint " + out.back().name);
  }
  return out;
}

const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& all, std::string_view name) {
  for (const auto& e : all)
    if (e.name == name) return e;
  throw Error(ErrorCode::Config, "no endpoint named " + std::string(name));
}

std::optional<std::string> resolve_credential(const ModelEndpoint& e) {
  std::string var = e.auth_ref;
  if (var.empty()) return std::nullopt;
  if (var.rfind("env:", 0) == 0) var = var.substr(4);
  else if (var.size() > 3 && var.rfind("${", 0) == 0 && var.back() == '}') var = var.substr(2, var.size() - 3);
  const char* value = std::getenv(var.c_str());
  if (!value || !*value)
    throw Error(ErrorCode::Config, "endpoint " + e.name + ": credential variable " + var + " is not set");
  return std::string(value);
}

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing '/'
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(ErrorCode::Config, "bad base_url " + url);
  ParsedUrl out{m[1].str() + "://" + m[2].str(), m[3].str()};
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  if (out.prefix.empty()) out.prefix = "/v1";
  return out;
}

bool mentions_context(std::string body) {
  std::transform(body.begin(), body.end(), body.begin(), [](unsigned char c) { return std::tolower(c); });
  return body.find("context") != std::string::npos;
}

}  // namespace

Completion OpenAiChatAdapter::complete(const ModelEndpoint& endpoint, const std::string& prompt) {
  const ParsedUrl url = parse_url(endpoint.base_url);
  const auto credential = resolve_credential(endpoint);

  nlohmann::json body = {{"model", endpoint.wire_model()},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                         {"temperature", endpoint.decoding.temperature},
                         {"max_tokens", endpoint.decoding.max_output_tokens}};
  if (endpoint.decoding.thinking) body["chat_template_kwargs"] = {{"enable_thinking", true}};

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(endpoint.request_timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client.set_connection_timeout(micros);
  client.set_read_timeout(micros);
  client.set_write_timeout(micros);
  httplib::Headers headers;
  if (credential) headers.emplace("Authorization", "Bearer " + *credential);

  Completion out;
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(url.prefix + "/chat/completions", headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - started;

  if (!res) {
    const auto err = res.error();
    // A read timeout surfaces as a plain read error; elapsed time tells them apart.
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout * 0.95)) {
      out.outcome = Completion::Outcome::Timeout;
      out.error = "timed out after " + std::to_string(endpoint.request_timeout) + " s";
    } else {
      out.outcome = Completion::Outcome::TransportError;
      out.error = httplib::to_string(err);
    }
    return out;
  }
  if (res->status != 200) {
    if ((res->status == 400 || res->status == 413) && mentions_context(res->body)) {
      out.outcome = Completion::Outcome::ContextExceeded;
    } else {
      out.outcome = Completion::Outcome::TransportError;
    }
    out.error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
    return out;
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    const auto& message = reply.at("choices").at(0).at("message");
    std::string content;
    if (message.contains("content") && message.at("content").is_string())
      content = message.at("content").get<std::string>();
    if (message.contains("reasoning_content") && message.at("reasoning_content").is_string())
      content = endpoint.thinking_open + message.at("reasoning_content").get<std::string>() +
                endpoint.thinking_close + content;
    out.text = std::move(content);
    if (reply.contains("usage") && reply.at("usage").is_object()) {
      const auto& usage = reply.at("usage");
      out.prompt_tokens = field_or<std::size_t>(usage, "prompt_tokens", 0);
      out.output_tokens = field_or<std::size_t>(usage, "completion_tokens", 0);
    } else {
      out.output_tokens = prompts::estimate_tokens(out.text);
    }
  } catch (const nlohmann::json::exception& e) {
    out = Completion{};
    out.outcome = Completion::Outcome::TransportError;
    out.error = std::string("malformed completion body: ") + e.what();
  }
  return out;
}

std::unique_ptr<Adapter> make_adapter(const ModelEndpoint& endpoint) {
  if (endpoint.adapter == "openai-chat") return std::make_unique<OpenAiChatAdapter>();
  throw Error(ErrorCode::Config, "endpoint " + endpoint.name + ": unknown adapter " + endpoint.adapter);
}

RunRecord execute_task(Adapter& adapter, const ModelEndpoint& endpoint, const PromptText& prompt,
                       const RunnerOptions& options) {
  RunRecord rec;
  rec.task_id = prompt.task_id;
  rec.endpoint_name = endpoint.name;
  if (prompt.estimated_tokens > options.max_input_tokens) {
    rec.status = RunStatus::ContextExceeded;
    rec.prompt_tokens = prompt.estimated_tokens;
    return rec;
  }

  Completion c;
  std::chrono::steady_clock::duration spent{};
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    try {
      c = adapter.complete(endpoint, prompt.text);
    } catch (const Error&) {
      throw;  // configuration problems are not per-record
    } catch (const std::exception& e) {
      c = Completion{};
      c.outcome = Completion::Outcome::TransportError;
      c.error = e.what();
    }
    spent = std::chrono::steady_clock::now() - started;
    if (c.outcome != Completion::Outcome::TransportError) break;
  }
  rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(spent).count();
  rec.prompt_tokens = c.prompt_tokens ? c.prompt_tokens : prompt.estimated_tokens;
  rec.output_tokens = c.output_tokens;
  rec.error = c.error;

  switch (c.outcome) {
    case Completion::Outcome::Timeout: rec.status = RunStatus::Timeout; break;
    case Completion::Outcome::ContextExceeded: rec.status = RunStatus::ContextExceeded; break;
    case Completion::Outcome::TransportError: rec.status = RunStatus::TransportError; break;
    case Completion::Outcome::Ok:
      rec.raw_response = std::move(c.text);
      rec.status = RunStatus::Ok;
      if (rec.output_tokens >= endpoint.decoding.max_output_tokens &&
          parse_verdict(rec.raw_response, endpoint.thinking_open, endpoint.thinking_close) ==
              ParsedVerdict::Unparseable)
        rec.status = RunStatus::OutputBudgetExhausted;
      break;
  }
  return rec;
}

RunRecord execute_task(const ModelEndpoint& endpoint, const PromptText& prompt, const RunnerOptions& options) {
  if (prompt.estimated_tokens > options.max_input_tokens) {
    OpenAiChatAdapter unused;
    return execute_task(unused, endpoint, prompt, options);
  }
  auto adapter = make_adapter(endpoint);
  return execute_task(*adapter, endpoint, prompt, options);
}

namespace {

// Underscore is markdown emphasis here, not part of a word.
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

bool match_word_ci(std::string_view text, std::size_t at, std::string_view word) {
  if (at + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(text[at + i])) != word[i]) return false;
  return true;
}

bool is_gap_char(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || std::string_view("*_:-\"'`=.>#").find(c) != std::string_view::npos;
}

}  // namespace

ParsedVerdict parse_verdict(std::string_view text, std::string_view open, std::string_view close) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text.substr(first, open.size()) == open) {
    const auto end = text.find(close, first + open.size());
    if (end == std::string_view::npos) return ParsedVerdict::Unparseable;  // still thinking
    text.remove_prefix(end + close.size());
  } else if (text.find(open) == std::string_view::npos) {
    // Reasoning opened by the chat template: only the closing delimiter is in the output.
    if (const auto end = text.find(close); end != std::string_view::npos) text.remove_prefix(end + close.size());
  }

  ParsedVerdict verdict = ParsedVerdict::Unparseable;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!match_word_ci(text, i, "final")) continue;
    if (i > 0 && is_word_char(text[i - 1])) continue;
    std::size_t j = i + 5;
    const std::size_t ws = j;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == ws || !match_word_ci(text, j, "answer")) continue;
    j += 6;
    while (j < text.size() && is_gap_char(text[j])) ++j;
    std::size_t word_len = 0;
    ParsedVerdict found = ParsedVerdict::Unparseable;
    if (match_word_ci(text, j, "okay")) found = ParsedVerdict::Holds, word_len = 4;
    else if (match_word_ci(text, j, "error")) found = ParsedVerdict::Violated, word_len = 5;
    if (found == ParsedVerdict::Unparseable) continue;
    if (j + word_len < text.size() && is_word_char(text[j + word_len])) continue;
    verdict = found;
  }
  return verdict;
}

struct RecordLog::Impl {
  std::FILE* file = nullptr;
  std::mutex mu;
  std::filesystem::path path;
};

RecordLog::RecordLog(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (std::filesystem::exists(path)) {
    const std::string content = io::read_file(path);
    std::size_t keep = content.size();
    if (!content.empty() && content.back() != '\n') {
      const auto nl = content.rfind('\n');
      keep = nl == std::string::npos ? 0 : nl + 1;
      std::filesystem::resize_file(path, keep);
    }
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < keep) {
      const auto nl = content.find('\n', pos);
      const std::string_view line(content.data() + pos, nl - pos);
      ++line_no;
      pos = nl + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        existing_.push_back(record_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  impl_->file = std::fopen(path.c_str(), "ab");
  if (!impl_->file) throw Error(ErrorCode::Io, "cannot open record log " + path.string());
}

RecordLog::~RecordLog() {
  if (impl_ && impl_->file) std::fclose(impl_->file);
}

void RecordLog::append(const RunRecord& r) {
  const std::string line = to_json(r).dump() + "\n";
  std::lock_guard lock(impl_->mu);
  if (std::fwrite(line.data(), 1, line.size(), impl_->file) != line.size() || std::fflush(impl_->file) != 0)
    throw Error(ErrorCode::Io, "write failed on " + impl_->path.string());
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::vector<RunRecord> out;
  for (const auto& j : io::read_jsonl(path)) out.push_back(record_from_json(j));
  return out;
}

RunProgress run_benchmark(Adapter& adapter, const ModelEndpoint& endpoint, std::span<const PromptText> prompts,
                          const std::filesystem::path& log_path, const BenchmarkOptions& options) {
  if (options.n_runs == 0) throw Error(ErrorCode::InvalidArgument, "n_runs must be at least 1");
  if (options.parallelism == 0) throw Error(ErrorCode::InvalidArgument, "parallelism must be at least 1");
  std::set<std::string> ids;
  for (const auto& p : prompts)
    if (!ids.insert(p.task_id).second) throw Error(ErrorCode::InvalidArgument, "duplicate prompt for " + p.task_id);

  RecordLog log(log_path);
  std::set<std::pair<std::string, std::size_t>> done;
  for (const auto& r : log.existing()) {
    if (r.endpoint_name != endpoint.name)
      throw Error(ErrorCode::Config, log_path.string() + " holds records of endpoint " + r.endpoint_name +
                                         ", not " + endpoint.name);
    done.emplace(r.task_id, r.run_index);
  }

  RunProgress progress;
  progress.planned = options.n_runs * prompts.size();
  std::vector<std::pair<std::size_t, std::size_t>> todo;  // (prompt index, run)
  for (std::size_t run = 0; run < options.n_runs; ++run)
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      if (done.count({prompts[i].task_id, run})) ++progress.skipped;
      else todo.emplace_back(i, run);
    }

  std::atomic<std::size_t> written{0};
  parallel_for(
      todo.size(), options.parallelism,
      [&](std::size_t k) {
        const auto [i, run] = todo[k];
        RunRecord rec = execute_task(adapter, endpoint, prompts[i], options.runner);
        rec.run_index = run;
        log.append(rec);
        ++written;
        if (options.on_record) options.on_record(rec);
      },
      options.stop);
  progress.written = written.load();
  progress.stopped = progress.skipped + progress.written < progress.planned;
  return progress;
}

RunProgress run_benchmark(const ModelEndpoint& endpoint, std::span<const PromptText> prompts,
                          const std::filesystem::path& log_path, const BenchmarkOptions& options) {
  auto adapter = make_adapter(endpoint);
  resolve_credential(endpoint);  // fail before any work
  parse_url(endpoint.base_url);
  return run_benchmark(*adapter, endpoint, prompts, log_path, options);
}

}  // namespace svbench::runner
