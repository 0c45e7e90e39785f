#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "svbench/prompts.hpp"

namespace svbench {

enum class TraceClass { ManifestBug, LatentBug, NoViolation, Incomplete };
enum class TraceFormat { Html, PlainText, Stripped };

inline constexpr std::array<TraceClass, 4> kAllTraceClasses = {TraceClass::ManifestBug, TraceClass::LatentBug,
                                                               TraceClass::NoViolation, TraceClass::Incomplete};

std::string_view to_string(TraceClass c);
std::string_view to_string(TraceFormat f);
std::optional<TraceClass> trace_class_from_string(std::string_view s);
std::optional<TraceFormat> trace_format_from_string(std::string_view s);

struct TraceDocument {
  std::string source_id;
  std::string source_c_path;  // empty when no paired source was found
  std::string raw_html;
  TraceClass trace_class = TraceClass::NoViolation;
  std::optional<std::string> cleaned_html;
  std::optional<std::string> plaintext;
  std::optional<std::string> stripped;
};

}  // namespace svbench

namespace svbench::traces {

struct ClassifyOptions {
  std::string manifest_marker = "Bug is manifest!!";
  std::string error_marker = "(Error (";
  std::vector<std::string> incomplete_markers = {"Analysis incomplete", "Execution timed out"};
};

TraceClass classify_trace(std::string_view raw_html, const ClassifyOptions& options = {});

/// Drops document boilerplate (doctype, comments, head, style, script, the
/// html/body wrappers) and timestamps (elements, attributes, and bare
/// timestamp lines between log messages). Log-message markup and text are
/// kept byte for byte.
std::string clean_html(std::string_view raw_html);

/// Tag-free text: one line break per block boundary, entities decoded,
/// log-level labels removed.
std::string to_plaintext(std::string_view raw_html);

/// Decodes named, decimal and hex character references. Unknown or
/// malformed references are left as written.
std::string decode_entities(std::string_view text);

struct StripOptions {
  std::size_t window = 2;
  std::vector<std::string> markers = {"(Error (", "Using state to error", "Bug is manifest"};
  std::vector<std::string> anchors = {"STORE:", "Executing statement:"};
};

struct StrippedTrace {
  std::string text;
  bool no_error_lines = false;
  std::size_t kept_lines = 0;
  std::size_t total_lines = 0;
  double reduction = 0;  // 1 - kept bytes / input bytes
};

StrippedTrace strip_to_error_lines(std::string_view plaintext, const StripOptions& options = {});

/// Classifies and fills every derived format.
TraceDocument make_document(std::string source_id, std::string source_c_path, std::string raw_html,
                            const ClassifyOptions& classify = {}, const StripOptions& strip = {});

/// The document's text in `format`. Throws FormatUnavailable when that form
/// was not derived.
const std::string& text_in(const TraceDocument& doc, TraceFormat format);

/// Every .html file under `dir` (recursive), paired with the .c file sharing
/// its basename. Sorted by source_id (relative path without extension).
std::vector<TraceDocument> load_trace_store(const std::filesystem::path& dir, const ClassifyOptions& classify = {},
                                            const StripOptions& strip = {});

enum class CorpusPreset { ManifestOnly, Expanded, Filtered, All, Balanced, Mixed };
std::string_view to_string(CorpusPreset p);
std::optional<CorpusPreset> corpus_preset_from_string(std::string_view s);

struct CorpusSpec {
  CorpusPreset preset = CorpusPreset::ManifestOnly;
  std::size_t manifest_count = 754;  // Expanded, Mixed
  std::size_t latent_count = 1000;   // Mixed
  std::uint64_t seed = 0;
  TraceFormat format = TraceFormat::Html;
};

using ClassCounts = std::array<std::size_t, 4>;

struct CorpusSelection {
  std::vector<std::size_t> indices;  // into the store, in corpus order
  ClassCounts composition{};
};

/// Throws Error{InsufficientClassSupply} naming the short class.
CorpusSelection compose_corpus(const std::vector<TraceDocument>& store, const CorpusSpec& spec);

struct PackOptions {
  std::string separator = "\n<|endoftext|>\n";
  bool prepend_source = false;  // C source ahead of each trace
  bool drop_verdict_lines = false;  // remove lines holding the manifest marker
  std::string manifest_marker = "Bug is manifest!!";
};

struct PackedCorpus {
  std::size_t document_count = 0;
  std::size_t byte_count = 0;
  std::size_t estimated_tokens = 0;
  ClassCounts composition{};
  std::string output_path;
};

/// Writes the corpus file and `<output>.manifest.json` next to it.
PackedCorpus pack_corpus(const std::vector<TraceDocument>& store, const CorpusSelection& selection,
                         const CorpusSpec& spec, const std::filesystem::path& output_path,
                         const PackOptions& options = {});

nlohmann::json to_json(const PackedCorpus& p);

struct InformalizeRequest {
  PromptText prompt;
  bool degenerate = false;  // empty trace
};

InformalizeRequest build_informalize_request(const TraceDocument& doc, std::string_view c_source,
                                             const prompts::TemplateSet& templates = prompts::TemplateSet::builtin());

}  // namespace svbench::traces
