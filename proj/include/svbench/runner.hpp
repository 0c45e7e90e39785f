#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "svbench/prompts.hpp"

namespace svbench {

struct DecodingParams {
  double temperature = 0.0;
  std::size_t max_output_tokens = 8192;
  bool thinking = false;
};

/// One model behind an OpenAI-style chat-completions endpoint.
struct ModelEndpoint {
  std::string name;
  std::string base_url;
  std::string auth_ref;  // environment variable holding the API key; empty for none
  DecodingParams decoding;
  double request_timeout = 600.0;  // seconds

  std::string model;  // model id sent on the wire; defaults to name
  std::string thinking_open = "<think>";
  std::string thinking_close = "</think>";
  std::string adapter = "openai-chat";

  const std::string& wire_model() const { return model.empty() ? name : model; }
};

nlohmann::json to_json(const ModelEndpoint& e);
ModelEndpoint endpoint_from_json(const nlohmann::json& j);

enum class RunStatus { Ok, Timeout, ContextExceeded, OutputBudgetExhausted, TransportError };
std::string_view to_string(RunStatus s);
std::optional<RunStatus> run_status_from_string(std::string_view s);

struct RunRecord {
  std::string task_id;
  std::size_t run_index = 0;
  std::string endpoint_name;
  std::string raw_response;
  RunStatus status = RunStatus::Ok;
  std::int64_t latency_ms = 0;
  std::size_t prompt_tokens = 0;
  std::size_t output_tokens = 0;
  std::string error;  // transport diagnostics, empty otherwise

  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

enum class ParsedVerdict { Holds, Violated, Unparseable };
std::string_view to_string(ParsedVerdict v);

}  // namespace svbench

namespace svbench::runner {

/// Reads an endpoint registry (TOML or JSON, chosen by extension) holding an
/// `endpoint` array of tables.
std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path);
const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& all, std::string_view name);

/// Value of the endpoint's credential. Accepts "VAR", "${VAR}" and "env:VAR".
/// Throws Error{Config} when the variable is unset.
std::optional<std::string> resolve_credential(const ModelEndpoint& e);

struct Completion {
  enum class Outcome { Ok, Timeout, ContextExceeded, TransportError } outcome = Outcome::Ok;
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t output_tokens = 0;
  std::string error;
};

/// Wire protocol for one completion request.
class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual Completion complete(const ModelEndpoint& endpoint, const std::string& prompt) = 0;
};

/// OpenAI chat-completions: POST {base_url}/chat/completions.
class OpenAiChatAdapter : public Adapter {
 public:
  Completion complete(const ModelEndpoint& endpoint, const std::string& prompt) override;
};

std::unique_ptr<Adapter> make_adapter(const ModelEndpoint& endpoint);

struct RunnerOptions {
  std::size_t max_input_tokens = 4096;
};

/// One request (plus one retry on transport failure). Never throws on
/// network problems; they end up in the record's status.
RunRecord execute_task(Adapter& adapter, const ModelEndpoint& endpoint, const PromptText& prompt,
                       const RunnerOptions& options = {});
RunRecord execute_task(const ModelEndpoint& endpoint, const PromptText& prompt,
                       const RunnerOptions& options = {});

/// Strips a leading thinking block, then finds the last "final answer" marker.
ParsedVerdict parse_verdict(std::string_view raw_response, std::string_view thinking_open = "<think>",
                            std::string_view thinking_close = "</think>");
inline ParsedVerdict parse_verdict(const RunRecord& r, const ModelEndpoint& e) {
  return parse_verdict(r.raw_response, e.thinking_open, e.thinking_close);
}

/// Append-only JSON Lines record log. Opening truncates a torn final line;
/// appends are serialized and flushed one record at a time.
class RecordLog {
 public:
  explicit RecordLog(const std::filesystem::path& path);
  ~RecordLog();
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  const std::vector<RunRecord>& existing() const { return existing_; }
  void append(const RunRecord& r);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<RunRecord> existing_;
};

std::vector<RunRecord> read_records(const std::filesystem::path& path);

struct RunProgress {
  std::size_t planned = 0;   // n_runs x tasks
  std::size_t skipped = 0;   // already in the log
  std::size_t written = 0;   // new records this invocation
  bool stopped = false;      // stop token fired before completion
};

struct BenchmarkOptions {
  std::size_t n_runs = 4;
  std::size_t parallelism = 1;
  RunnerOptions runner;
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const RunRecord&)> on_record;  // called after each append
};

/// Every (task, run) pair exactly once across invocations sharing `log_path`.
RunProgress run_benchmark(Adapter& adapter, const ModelEndpoint& endpoint, std::span<const PromptText> prompts,
                          const std::filesystem::path& log_path, const BenchmarkOptions& options);
RunProgress run_benchmark(const ModelEndpoint& endpoint, std::span<const PromptText> prompts,
                          const std::filesystem::path& log_path, const BenchmarkOptions& options);

}  // namespace svbench::runner
