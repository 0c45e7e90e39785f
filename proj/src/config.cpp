#include "svbench/config.hpp"

#include <toml.hpp>

#include "svbench/error.hpp"
#include "svbench/io.hpp"

namespace svbench::config {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(std::string_view source, const std::string& why) {
  throw Error(ErrorCode::Config, std::string(source) + ": " + why);
}

fs::path resolve(const fs::path& base, std::string_view p) {
  fs::path path{std::string(p)};
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

// Accepts a single string or an array of strings.
std::vector<fs::path> path_list(const toml::node_view<const toml::node>& node, const fs::path& base,
                                std::string_view source, std::string_view key) {
  std::vector<fs::path> out;
  if (!node) return out;
  if (auto s = node.value<std::string>()) {
    out.push_back(resolve(base, *s));
    return out;
  }
  const toml::array* arr = node.as_array();
  if (!arr) bad(source, std::string(key) + " must be a string or an array of strings");
  for (const auto& el : *arr) {
    auto s = el.value<std::string>();
    if (!s) bad(source, std::string(key) + " entries must be strings");
    out.push_back(resolve(base, *s));
  }
  return out;
}

std::optional<fs::path> opt_path(const toml::node_view<const toml::node>& node, const fs::path& base,
                                 std::string_view source, std::string_view key) {
  if (!node) return std::nullopt;
  auto s = node.value<std::string>();
  if (!s) bad(source, std::string(key) + " must be a string");
  return resolve(base, *s);
}

}  // namespace

ProjectConfig parse_config(std::string_view toml_text, const fs::path& base_dir, std::string_view source_name) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    bad(source_name, std::string(e.description()));
  }
  const toml::table& t = tbl;
  ProjectConfig cfg;

  if (auto out = t["output_root"].value<std::string>()) cfg.output_root = resolve(base_dir, *out);
  else if (t["output_root"]) bad(source_name, "output_root must be a string");
  else cfg.output_root = resolve(base_dir, "out");

  cfg.endpoint_registry = opt_path(t["endpoints"], base_dir, source_name, "endpoints");
  cfg.trace_store = opt_path(t["trace_store"], base_dir, source_name, "trace_store");

  cfg.corpus_roots = path_list(t["corpus"]["roots"], base_dir, source_name, "corpus.roots");
  cfg.invalid_task_lists = path_list(t["corpus"]["invalid_tasks"], base_dir, source_name, "corpus.invalid_tasks");
  cfg.invalid_file_lists = path_list(t["corpus"]["invalid_files"], base_dir, source_name, "corpus.invalid_files");

  const auto holdout = t["holdout"];
  if (holdout && !holdout.is_table()) bad(source_name, "holdout must be a table");
  if (auto n = holdout["per_property"]) {
    auto v = n.value<std::int64_t>();
    if (!v || *v <= 0) bad(source_name, "holdout.per_property must be a positive integer");
    cfg.holdout.per_property = static_cast<std::size_t>(*v);
  }
  if (auto n = holdout["holds_fraction"]) {
    auto v = n.value<double>();
    if (!v || *v < 0 || *v > 1) bad(source_name, "holdout.holds_fraction must be in [0, 1]");
    cfg.holdout.holds_fraction = *v;
  }
  if (auto n = holdout["seed"]) {
    auto v = n.value<std::int64_t>();
    if (!v || *v < 0) bad(source_name, "holdout.seed must be a non-negative integer");
    cfg.holdout.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto n = holdout["relax_bins"]) {
    auto v = n.value<bool>();
    if (!v) bad(source_name, "holdout.relax_bins must be a boolean");
    cfg.relax_bins = *v;
  }
  return cfg;
}

void validate_paths(const ProjectConfig& cfg) {
  auto need = [&](const fs::path& p, std::string_view what) {
    if (!fs::exists(p))
      throw Error(ErrorCode::Config, cfg.config_path.string() + ": " + std::string(what) + " not found: " + p.string());
  };
  for (const auto& p : cfg.corpus_roots) need(p, "corpus root");
  for (const auto& p : cfg.invalid_task_lists) need(p, "invalid-task list");
  for (const auto& p : cfg.invalid_file_lists) need(p, "invalid-file list");
  if (cfg.endpoint_registry) need(*cfg.endpoint_registry, "endpoint registry");
  if (cfg.trace_store) need(*cfg.trace_store, "trace store");
}

ProjectConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::Config, "config file not found: " + path.string());
  ProjectConfig cfg = parse_config(io::read_file(path), path.parent_path(), path.string());
  cfg.config_path = path;
  validate_paths(cfg);
  return cfg;
}

corpus::ExclusionLists load_exclusions(const ProjectConfig& cfg) {
  corpus::ExclusionLists out;
  for (const auto& p : cfg.invalid_task_lists) out.invalid_task_ids.merge(corpus::parse_exclusion_list(io::read_file(p)));
  for (const auto& p : cfg.invalid_file_lists)
    out.invalid_file_paths.merge(corpus::parse_exclusion_list(io::read_file(p)));
  return out;
}

}  // namespace svbench::config
