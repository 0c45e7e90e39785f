#include "svbench/corpus.hpp"

#include "svbench/curate.hpp"
#include "svbench/error.hpp"
#include "svbench/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>

namespace svbench {

nlohmann::json to_json(const VerificationTask& t) {
  return {{"id", t.id},
          {"source_path", t.source_path},
          {"c_source", t.c_source},
          {"property", to_string(t.property)},
          {"expected", to_string(t.expected)},
          {"data_model", to_string(t.data_model)},
          {"loc", t.loc},
          {"origin_subcategory", t.origin_subcategory}};
}

VerificationTask task_from_json(const nlohmann::json& j) {
  auto field = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string())
      throw Error(ErrorCode::InvalidArgument, std::string("task record missing string field ") + key);
    return j[key].get<std::string>();
  };
  VerificationTask t;
  t.id = field("id");
  t.source_path = field("source_path");
  t.c_source = field("c_source");
  t.origin_subcategory = field("origin_subcategory");
  auto property = property_from_string(field("property"));
  auto expected = verdict_from_string(field("expected"));
  auto model = data_model_from_string(field("data_model"));
  if (!property || !expected || !model || !j.contains("loc") || !j["loc"].is_number_unsigned())
    throw Error(ErrorCode::InvalidArgument, "task record " + t.id + " has invalid enum or loc field");
  t.property = *property;
  t.expected = *expected;
  t.data_model = *model;
  t.loc = j["loc"].get<std::size_t>();
  return t;
}

}  // namespace svbench

namespace svbench::corpus {

namespace {

namespace fs = std::filesystem;

std::string normalize_path(const fs::path& p) {
  return p.lexically_normal().generic_string();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_c_file(std::string_view name) {
  return name.ends_with(".c") || name.ends_with(".i");
}

[[noreturn]] void malformed(std::string_view path, const std::string& why) {
  throw Error(ErrorCode::MalformedMetadata, std::string(path) + ": " + why);
}

std::string origin_of(std::string_view definition_path) {
  const auto slash = definition_path.find('/');
  if (slash == std::string_view::npos) return "";
  return lower(definition_path.substr(0, slash));
}

}  // namespace

TaskDefinition parse_task_definition(std::string_view yaml_text, std::string_view definition_path) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    malformed(definition_path, std::string("unparseable YAML: ") + e.what());
  }
  if (!root.IsMap()) malformed(definition_path, "top level is not a mapping");

  TaskDefinition def;
  def.definition_path = normalize_path(fs::path(std::string(definition_path)));
  const fs::path base = fs::path(def.definition_path).parent_path();

  try {
    const YAML::Node inputs = root["input_files"];
    std::vector<std::string> files;
    if (!inputs) malformed(definition_path, "missing input_files");
    if (inputs.IsScalar()) {
      files.push_back(inputs.as<std::string>());
    } else if (inputs.IsSequence()) {
      for (const auto& f : inputs) files.push_back(f.as<std::string>());
    } else {
      malformed(definition_path, "input_files is neither a string nor a list");
    }
    std::vector<std::string> c_files;
    std::copy_if(files.begin(), files.end(), std::back_inserter(c_files),
                 [](const std::string& f) { return is_c_file(f); });
    if (c_files.size() > 1)
      throw Error(ErrorCode::MultiFileTask, std::string(definition_path) + ": " +
                                                std::to_string(c_files.size()) + " C input files");
    if (c_files.empty()) malformed(definition_path, "input_files names no C file");
    def.source_path = normalize_path(base / c_files.front());

    const YAML::Node props = root["properties"];
    if (!props) malformed(definition_path, "missing properties");
    if (!props.IsSequence() && !props.IsNull())
      malformed(definition_path, "properties is not a list");
    if (props.IsSequence()) {
      for (const auto& entry : props) {
        if (!entry.IsMap() || !entry["property_file"])
          malformed(definition_path, "property entry without property_file");
        PropertyEntry pe;
        pe.property_file = entry["property_file"].as<std::string>();
        pe.property = property_from_svcomp_name(fs::path(pe.property_file).stem().string());
        if (const YAML::Node v = entry["expected_verdict"]) {
          pe.expected = v.as<bool>() ? Verdict::Holds : Verdict::Violated;
        }
        def.entries.push_back(std::move(pe));
      }
    }

    const YAML::Node& const_root = root;
    const YAML::Node options = const_root["options"];
    const YAML::Node model = options && options.IsMap() ? options["data_model"] : YAML::Node();
    if (model && !model.IsNull()) {
      auto dm = data_model_from_string(model.as<std::string>());
      if (!dm) malformed(definition_path, "unknown data_model " + model.as<std::string>());
      def.data_model = *dm;
    } else {
      def.data_model = DataModel::ILP32;
      def.data_model_defaulted = true;
    }
  } catch (const YAML::Exception& e) {
    malformed(definition_path, std::string("bad field type: ") + e.what());
  }
  return def;
}

TaskDefinition load_task_definition(const fs::path& root, const fs::path& relative_yml) {
  TaskDefinition def =
      parse_task_definition(io::read_file(root / relative_yml), relative_yml.generic_string());
  const fs::path c_path = root / def.source_path;
  if (fs::is_regular_file(c_path)) def.raw_source = io::read_file(c_path);
  return def;
}

std::string make_task_id(std::string_view definition_path, Property property) {
  std::string path = normalize_path(fs::path(std::string(definition_path)));
  return lower(path) + "::" + std::string(svcomp_property_name(property));
}

std::set<std::string> parse_exclusion_list(std::string_view text) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.insert(std::string(line.substr(first, last - first + 1)));
  }
  return out;
}

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::MalformedMetadata: return "MalformedMetadata";
    case RejectionReason::MultiFileTask: return "MultiFileTask";
    case RejectionReason::NoProperties: return "NoProperties";
    case RejectionReason::InvalidFile: return "InvalidFile";
    case RejectionReason::MissingSource: return "MissingSource";
    case RejectionReason::CustomHeader: return "CustomHeader";
    case RejectionReason::UnsupportedProperty: return "UnsupportedProperty";
    case RejectionReason::MissingVerdict: return "MissingVerdict";
    case RejectionReason::InvalidTask: return "InvalidTask";
  }
  return "Unknown";
}

nlohmann::json to_json(const Rejection& r) {
  return {{"definition_path", r.definition_path},
          {"subject", r.subject},
          {"reason", to_string(r.reason)},
          {"detail", r.detail}};
}

FilterResult apply_filters(const std::vector<TaskDefinition>& defs, const ExclusionLists& excl,
                           const IncludeReportFn& include_report_fn) {
  FilterResult result;
  auto reject_all = [&](const TaskDefinition& def, RejectionReason reason, const std::string& detail) {
    if (def.entries.empty()) {
      result.rejection_log.push_back({def.definition_path, def.source_path, reason, detail});
      return;
    }
    for (const auto& e : def.entries) {
      std::string subject =
          e.property ? make_task_id(def.definition_path, *e.property) : e.property_file;
      result.rejection_log.push_back({def.definition_path, std::move(subject), reason, detail});
    }
  };

  for (const auto& def : defs) {
    if (def.entries.empty()) {
      reject_all(def, RejectionReason::NoProperties, "definition declares no properties");
      continue;
    }
    if (excl.invalid_file_paths.contains(def.source_path) ||
        excl.invalid_file_paths.contains(def.definition_path)) {
      reject_all(def, RejectionReason::InvalidFile, "listed in exclusion file list");
      continue;
    }
    if (!def.raw_source) {
      reject_all(def, RejectionReason::MissingSource, "C source not found: " + def.source_path);
      continue;
    }
    const cpre::StripResult stripped = cpre::strip_comments_checked(*def.raw_source);
    const cpre::IncludeReport includes = include_report_fn(stripped.text);
    if (!includes.custom_includes.empty() || includes.has_import) {
      std::string detail = includes.has_import ? "#import directive" : "";
      for (const auto& h : includes.custom_includes) {
        if (!detail.empty()) detail += ", ";
        detail += h;
      }
      reject_all(def, RejectionReason::CustomHeader, detail);
      continue;
    }
    const std::size_t loc = cpre::count_loc(stripped.text);
    for (const auto& e : def.entries) {
      if (!e.property) {
        result.rejection_log.push_back({def.definition_path, e.property_file,
                                        RejectionReason::UnsupportedProperty, e.property_file});
        continue;
      }
      std::string id = make_task_id(def.definition_path, *e.property);
      if (!e.expected) {
        result.rejection_log.push_back(
            {def.definition_path, id, RejectionReason::MissingVerdict, "no expected_verdict"});
        continue;
      }
      if (excl.invalid_task_ids.contains(id) ||
          excl.invalid_task_ids.contains(def.definition_path)) {
        result.rejection_log.push_back(
            {def.definition_path, id, RejectionReason::InvalidTask, "listed in exclusion task list"});
        continue;
      }
      VerificationTask task;
      task.id = std::move(id);
      task.source_path = def.source_path;
      task.c_source = stripped.text;
      task.property = *e.property;
      task.expected = *e.expected;
      task.data_model = def.data_model;
      task.loc = loc;
      task.origin_subcategory = origin_of(def.definition_path);
      result.accepted.push_back(std::move(task));
    }
  }
  return result;
}

std::size_t CorpusStats::count(Property p, Verdict v) const {
  std::size_t n = 0;
  for (auto c : cells[index_of(p)][index_of(v)]) n += c;
  return n;
}

std::size_t CorpusStats::count(Property p) const {
  return count(p, Verdict::Holds) + count(p, Verdict::Violated);
}

CorpusStats corpus_stats(const std::vector<VerificationTask>& tasks) {
  CorpusStats stats;
  for (const auto& t : tasks) {
    ++stats.total;
    auto bin = curate::try_length_bin(t.loc);
    if (!bin) {
      ++stats.unbinnable;
      continue;
    }
    ++stats.cells[index_of(t.property)][index_of(t.expected)][index_of(*bin)];
  }
  return stats;
}

}  // namespace svbench::corpus

namespace svbench::corpus {

std::vector<TaskDefinition> to_definitions(const std::vector<VerificationTask>& tasks) {
  std::vector<TaskDefinition> defs;
  std::map<std::string, std::size_t> index;
  for (const auto& t : tasks) {
    const auto sep = t.id.rfind("::");
    std::string def_path = t.id.substr(0, sep);
    auto [it, inserted] = index.try_emplace(def_path, defs.size());
    if (inserted) {
      TaskDefinition def;
      def.definition_path = def_path;
      def.source_path = t.source_path;
      def.data_model = t.data_model;
      def.raw_source = t.c_source;
      defs.push_back(std::move(def));
    }
    defs[it->second].entries.push_back(
        {std::string(svcomp_property_name(t.property)) + ".prp", t.property, t.expected});
  }
  return defs;
}

}  // namespace svbench::corpus

namespace svbench::corpus {

FilterResult ingest_tree(const std::filesystem::path& root, const ExclusionLists& excl,
                         const IncludeReportFn& include_report_fn) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw Error(ErrorCode::Io, "corpus root is not a directory: " + root.string());

  std::vector<fs::path> ymls;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".yml" || ext == ".yaml") ymls.push_back(fs::relative(entry.path(), root));
  }
  std::sort(ymls.begin(), ymls.end());

  std::vector<TaskDefinition> defs;
  std::vector<Rejection> load_failures;
  for (const auto& rel : ymls) {
    try {
      defs.push_back(load_task_definition(root, rel));
    } catch (const Error& e) {
      RejectionReason reason;
      if (e.code() == ErrorCode::MultiFileTask) reason = RejectionReason::MultiFileTask;
      else if (e.code() == ErrorCode::MalformedMetadata) reason = RejectionReason::MalformedMetadata;
      else throw;
      load_failures.push_back({rel.generic_string(), rel.generic_string(), reason, e.what()});
    }
  }

  FilterResult result = apply_filters(defs, excl, include_report_fn);
  result.rejection_log.insert(result.rejection_log.begin(), load_failures.begin(), load_failures.end());
  return result;
}

}  // namespace svbench::corpus
