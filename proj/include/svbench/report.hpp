#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svbench/domain.hpp"
#include "svbench/metrics.hpp"

namespace svbench::report {

/// Percent value with its across-run std; either may be absent.
struct Cell {
  std::optional<double> mean;
  std::optional<double> std;
};

struct ModelAccuracy {
  std::string name;
  std::size_t n_runs = 0;
  Cell holds;
  Cell violated;
  std::array<std::array<Cell, 2>, 5> per_property{};  // [property][verdict]
  std::array<std::array<Cell, 2>, 5> per_bin{};       // [bin][verdict]

  /// Macro-average of holds and violated; absent if either side is.
  std::optional<double> overall() const;
  const Cell& by_verdict(Verdict v) const { return v == Verdict::Holds ? holds : violated; }
};

ModelAccuracy from_summary(std::string name, const AccuracySummary& summary);

/// Accepts one model object ("name" or "endpoint" plus holds / violated /
/// per_property / per_bin cells as written by to_json(AccuracySummary)).
ModelAccuracy model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelAccuracy& m);

/// Reads either {"models": [...]} or a single model object.
std::vector<ModelAccuracy> load_models(const std::filesystem::path& path);

/// The published baseline shipped with the data directory.
std::filesystem::path baseline_fixture_path();

struct Comparison {
  std::string model_a;
  std::string model_b;
  std::optional<metrics::TTestResult> t_test;
  std::optional<metrics::McNemarResult> mcnemar;
};

nlohmann::json to_json(const Comparison& c);
Comparison comparison_from_json(const nlohmann::json& j);
std::vector<Comparison> load_comparisons(const std::filesystem::path& path);

/// Descending overall; models without an overall go last; ties by name.
std::vector<ModelAccuracy> sort_by_overall(std::vector<ModelAccuracy> models);

/// True when every (bin, verdict) cell has a mean.
bool series_complete(const ModelAccuracy& m);

// rank,model,holds,holds_std,violated,violated_std,overall
std::string bars_csv(const std::vector<ModelAccuracy>& sorted);
// model,verdict,bin,accuracy,std
std::string length_decay_csv(const std::vector<ModelAccuracy>& models);
// model,verdict,property,mean,std
std::string per_property_csv(const std::vector<ModelAccuracy>& models);
// model_a,model_b,mean_difference,t,df,t_p,t_degenerate,mcnemar_a_only,mcnemar_b_only,mcnemar_p,mcnemar_exact
std::string comparisons_csv(const std::vector<Comparison>& comparisons);

std::string report_markdown(const std::vector<ModelAccuracy>& sorted, const std::vector<Comparison>& comparisons);

std::string bar_chart_svg(const std::vector<ModelAccuracy>& sorted);
std::string length_decay_svg(const std::vector<ModelAccuracy>& models);

struct ReportOptions {
  bool svg = false;
};

/// Writes bars.csv, length_decay.csv, per_property.csv, comparisons.csv,
/// report.md (and bars.svg, length_decay.svg) under `dir`. Throws
/// InvalidArgument when `models` is empty.
std::vector<std::filesystem::path> emit_report(const std::vector<ModelAccuracy>& models,
                                               const std::vector<Comparison>& comparisons,
                                               const std::filesystem::path& dir, const ReportOptions& options = {});

}  // namespace svbench::report
