#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "svbench/cpre.hpp"
#include "svbench/domain.hpp"

namespace svbench {

/// One benchmark unit: a comment-stripped C program, one property, and its
/// ground-truth verdict.
struct VerificationTask {
  std::string id;
  std::string source_path;
  std::string c_source;
  Property property = Property::Reachability;
  Verdict expected = Verdict::Holds;
  DataModel data_model = DataModel::ILP32;
  std::size_t loc = 0;
  std::string origin_subcategory;

  bool operator==(const VerificationTask&) const = default;
};

nlohmann::json to_json(const VerificationTask& task);
VerificationTask task_from_json(const nlohmann::json& j);

}  // namespace svbench

namespace svbench::corpus {

/// One `properties:` entry of a task definition. Unknown property files and
/// missing verdicts are kept so the filter can log them.
struct PropertyEntry {
  std::string property_file;
  std::optional<Property> property;
  std::optional<Verdict> expected;
};

struct TaskDefinition {
  std::string definition_path;  // relative .yml path, '/'-separated
  std::string source_path;      // relative .c path, '/'-separated
  std::vector<PropertyEntry> entries;
  DataModel data_model = DataModel::ILP32;
  bool data_model_defaulted = false;
  std::optional<std::string> raw_source;  // C text, if it was loaded
};

/// Parses SV-COMP task metadata. `definition_path` is the .yml path relative
/// to the corpus root; input files resolve against its directory.
/// Throws Error{MalformedMetadata} or Error{MultiFileTask}.
TaskDefinition parse_task_definition(std::string_view yaml_text, std::string_view definition_path);

/// Reads `root/relative_yml` and the C file it names (if present).
TaskDefinition load_task_definition(const std::filesystem::path& root,
                                    const std::filesystem::path& relative_yml);

/// Task id: lower-cased definition path, "::", SV-COMP property name.
std::string make_task_id(std::string_view definition_path, Property property);

struct ExclusionLists {
  std::set<std::string> invalid_task_ids;
  std::set<std::string> invalid_file_paths;
};

/// Parses a plain-text list: one entry per line, '#' starts a comment.
std::set<std::string> parse_exclusion_list(std::string_view text);

enum class RejectionReason {
  MalformedMetadata,
  MultiFileTask,
  NoProperties,
  InvalidFile,
  MissingSource,
  CustomHeader,
  UnsupportedProperty,
  MissingVerdict,
  InvalidTask,
};

std::string_view to_string(RejectionReason r);

struct Rejection {
  std::string definition_path;
  std::string subject;  // task id, property file or source path
  RejectionReason reason;
  std::string detail;
};

nlohmann::json to_json(const Rejection& r);

struct FilterResult {
  std::vector<VerificationTask> accepted;
  std::vector<Rejection> rejection_log;
};

using IncludeReportFn = std::function<cpre::IncludeReport(std::string_view)>;

/// Applies the benchmark validity filters. Every candidate (definition x
/// property entry) ends up in exactly one of accepted / rejection_log; a
/// definition with no entries is logged once as NoProperties.
FilterResult apply_filters(const std::vector<TaskDefinition>& defs, const ExclusionLists& excl,
                           const IncludeReportFn& include_report_fn = cpre::scan_includes);

struct CorpusStats {
  // [property][verdict][bin]
  std::array<std::array<std::array<std::size_t, 5>, 2>, 5> cells{};
  std::size_t unbinnable = 0;  // LOC 0 or above 400
  std::size_t total = 0;

  std::size_t count(Property p, Verdict v) const;
  std::size_t count(Property p) const;
};

CorpusStats corpus_stats(const std::vector<VerificationTask>& tasks);

}  // namespace svbench::corpus

namespace svbench::corpus {

/// Rebuilds definitions from accepted tasks (grouped by definition path in
/// first-seen order), so filtered output can be fed back through the filter.
std::vector<TaskDefinition> to_definitions(const std::vector<VerificationTask>& tasks);

}  // namespace svbench::corpus

namespace svbench::corpus {

/// Walks `root` for .yml/.yaml definitions (sorted by path), loads each one,
/// logs load failures as MalformedMetadata / MultiFileTask rejections and
/// filters the rest.
FilterResult ingest_tree(const std::filesystem::path& root, const ExclusionLists& excl,
                         const IncludeReportFn& include_report_fn = cpre::scan_includes);

}  // namespace svbench::corpus
