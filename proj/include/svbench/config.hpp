#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "svbench/corpus.hpp"
#include "svbench/curate.hpp"

namespace svbench::config {

/// Project-level settings. Relative paths are resolved against the directory
/// holding the config file.
struct ProjectConfig {
  std::filesystem::path config_path;
  std::vector<std::filesystem::path> corpus_roots;
  std::vector<std::filesystem::path> invalid_task_lists;
  std::vector<std::filesystem::path> invalid_file_lists;
  curate::HoldoutSpec holdout;
  bool relax_bins = false;
  std::optional<std::filesystem::path> endpoint_registry;
  std::optional<std::filesystem::path> trace_store;
  std::filesystem::path output_root;
};

/// Parses without touching the filesystem. Throws Error{Config}.
ProjectConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir,
                           std::string_view source_name = "config");

/// Every referenced input path (not the output root) must exist; the first
/// missing one is named in Error{Config}.
void validate_paths(const ProjectConfig& cfg);

/// parse_config + validate_paths.
ProjectConfig load_config(const std::filesystem::path& path);

/// Unions all configured exclusion lists.
corpus::ExclusionLists load_exclusions(const ProjectConfig& cfg);

}  // namespace svbench::config
