#include "svbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/judge.hpp"
#include "svbench/prompts.hpp"

namespace svbench::report {

namespace {

using nlohmann::json;

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) throw Error(ErrorCode::InvalidArgument, std::string("non-numeric ") + key);
  return j[key].get<double>();
}

Cell cell_from(const json& j) {
  if (j.is_null()) return {};
  if (j.is_number()) return {j.get<double>(), std::nullopt};
  return {opt_number(j, "mean"), opt_number(j, "std")};
}

json cell_to(const Cell& c) {
  return {{"mean", c.mean ? json(*c.mean) : json(nullptr)}, {"std", c.std ? json(*c.std) : json(nullptr)}};
}

Cell cell_of(const CellStat& s) { return {s.mean, s.std}; }

// Nested lookup tolerant of a missing level; verdict keys may be "Holds" or "holds".
const json* find_verdict(const json& parent, std::string_view outer, Verdict v) {
  if (!parent.is_object()) return nullptr;
  auto it = parent.find(std::string(outer));
  if (it == parent.end() || !it->is_object()) return nullptr;
  std::string key(to_string(v));
  if (auto vit = it->find(key); vit != it->end()) return &*vit;
  key[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(key[0])));
  if (auto vit = it->find(key); vit != it->end()) return &*vit;
  return nullptr;
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v);
  return buf;
}

std::string pval(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", p);
  return buf;
}

std::string md_cell(const Cell& c) {
  if (!c.mean) return "n/a";
  if (!c.std) return pct(c.mean);
  return pct(c.mean) + " ± " + pct(c.std);
}

std::string md_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|') out += '\\';
    out += ch;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string series_color(std::size_t i, std::size_t n) {
  const double hue = 360.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.0f,70%%,42%%)", hue);
  return buf;
}

}  // namespace

std::optional<double> ModelAccuracy::overall() const {
  if (!holds.mean || !violated.mean) return std::nullopt;
  return (*holds.mean + *violated.mean) / 2.0;
}

ModelAccuracy from_summary(std::string name, const AccuracySummary& s) {
  ModelAccuracy m;
  m.name = std::move(name);
  m.n_runs = s.n_runs;
  m.holds = cell_of(s.holds);
  m.violated = cell_of(s.violated);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t v = 0; v < 2; ++v) {
      m.per_property[i][v] = cell_of(s.per_property[i][v]);
      m.per_bin[i][v] = cell_of(s.per_bin[i][v]);
    }
  return m;
}

ModelAccuracy model_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "model entry is not an object");
  ModelAccuracy m;
  if (j.contains("name") && j["name"].is_string()) m.name = j["name"].get<std::string>();
  else if (j.contains("endpoint") && j["endpoint"].is_string()) m.name = j["endpoint"].get<std::string>();
  else throw Error(ErrorCode::InvalidArgument, "model entry has no name");
  if (j.contains("n_runs") && j["n_runs"].is_number_unsigned()) m.n_runs = j["n_runs"].get<std::size_t>();
  if (j.contains("holds")) m.holds = cell_from(j["holds"]);
  if (j.contains("violated")) m.violated = cell_from(j["violated"]);
  const json empty = json::object();
  const json& props = j.contains("per_property") ? j["per_property"] : empty;
  const json& bins = j.contains("per_bin") ? j["per_bin"] : empty;
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      if (const json* c = find_verdict(props, to_string(p), v)) m.per_property[index_of(p)][index_of(v)] = cell_from(*c);
  for (LengthBin b : kAllBins)
    for (Verdict v : kAllVerdicts)
      if (const json* c = find_verdict(bins, to_string(b), v)) m.per_bin[index_of(b)][index_of(v)] = cell_from(*c);
  return m;
}

json to_json(const ModelAccuracy& m) {
  json j = {{"name", m.name}, {"n_runs", m.n_runs}, {"holds", cell_to(m.holds)}, {"violated", cell_to(m.violated)}};
  const auto overall = m.overall();
  j["overall"] = overall ? json(*overall) : json(nullptr);
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      j["per_property"][std::string(to_string(p))][std::string(to_string(v))] =
          cell_to(m.per_property[index_of(p)][index_of(v)]);
  for (LengthBin b : kAllBins)
    for (Verdict v : kAllVerdicts)
      j["per_bin"][std::string(to_string(b))][std::string(to_string(v))] = cell_to(m.per_bin[index_of(b)][index_of(v)]);
  return j;
}

std::vector<ModelAccuracy> load_models(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  std::vector<ModelAccuracy> out;
  if (j.is_object() && j.contains("models")) {
    const std::size_t default_runs = j.value("n_runs", std::size_t{0});
    for (const auto& entry : j["models"]) {
      out.push_back(model_from_json(entry));
      if (out.back().n_runs == 0) out.back().n_runs = default_runs;
    }
  } else {
    out.push_back(model_from_json(j));
  }
  return out;
}

std::filesystem::path baseline_fixture_path() { return prompts::data_dir() / "fixtures" / "baseline_models.json"; }

json to_json(const Comparison& c) {
  json j = {{"model_a", c.model_a}, {"model_b", c.model_b}};
  if (c.t_test)
    j["t_test"] = {{"t", c.t_test->t},
                   {"df", c.t_test->df},
                   {"mean_difference", c.t_test->mean_difference},
                   {"p_value", c.t_test->p_value},
                   {"degenerate", c.t_test->degenerate}};
  if (c.mcnemar)
    j["mcnemar"] = {{"a_only", c.mcnemar->a_only},
                    {"b_only", c.mcnemar->b_only},
                    {"p_value", c.mcnemar->p_value},
                    {"exact", c.mcnemar->exact},
                    {"no_discordance", c.mcnemar->no_discordance}};
  return j;
}

Comparison comparison_from_json(const json& j) {
  Comparison c;
  c.model_a = j.at("model_a").get<std::string>();
  c.model_b = j.at("model_b").get<std::string>();
  if (j.contains("t_test")) {
    const json& t = j["t_test"];
    metrics::TTestResult r;
    r.t = t.at("t").get<double>();
    r.df = t.at("df").get<std::size_t>();
    r.mean_difference = t.at("mean_difference").get<double>();
    r.p_value = t.at("p_value").get<double>();
    r.degenerate = t.value("degenerate", false);
    c.t_test = r;
  }
  if (j.contains("mcnemar")) {
    const json& m = j["mcnemar"];
    metrics::McNemarResult r;
    r.a_only = m.at("a_only").get<std::size_t>();
    r.b_only = m.at("b_only").get<std::size_t>();
    r.p_value = m.at("p_value").get<double>();
    r.exact = m.value("exact", true);
    r.no_discordance = m.value("no_discordance", false);
    c.mcnemar = r;
  }
  return c;
}

std::vector<Comparison> load_comparisons(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  std::vector<Comparison> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(comparison_from_json(e));
  } else {
    out.push_back(comparison_from_json(j));
  }
  return out;
}

std::vector<ModelAccuracy> sort_by_overall(std::vector<ModelAccuracy> models) {
  std::stable_sort(models.begin(), models.end(), [](const ModelAccuracy& a, const ModelAccuracy& b) {
    const auto oa = a.overall();
    const auto ob = b.overall();
    if (oa.has_value() != ob.has_value()) return oa.has_value();
    if (oa && *oa != *ob) return *oa > *ob;
    return a.name < b.name;
  });
  return models;
}

bool series_complete(const ModelAccuracy& m) {
  for (const auto& bin : m.per_bin)
    for (const auto& c : bin)
      if (!c.mean) return false;
  return true;
}

std::string bars_csv(const std::vector<ModelAccuracy>& sorted) {
  std::ostringstream os;
  os << "rank,model,holds,holds_std,violated,violated_std,overall\n";
  std::size_t rank = 0;
  for (const auto& m : sorted)
    os << ++rank << ',' << io::csv_field(m.name) << ',' << pct(m.holds.mean) << ',' << pct(m.holds.std) << ','
       << pct(m.violated.mean) << ',' << pct(m.violated.std) << ',' << pct(m.overall()) << '\n';
  return os.str();
}

std::string length_decay_csv(const std::vector<ModelAccuracy>& models) {
  std::ostringstream os;
  os << "model,verdict,bin,accuracy,std\n";
  for (const auto& m : models)
    for (Verdict v : kAllVerdicts)
      for (LengthBin b : kAllBins) {
        const Cell& c = m.per_bin[index_of(b)][index_of(v)];
        os << io::csv_field(m.name) << ',' << to_string(v) << ',' << to_string(b) << ',' << pct(c.mean) << ','
           << pct(c.std) << '\n';
      }
  return os.str();
}

std::string per_property_csv(const std::vector<ModelAccuracy>& models) {
  std::ostringstream os;
  os << "model,verdict,property,mean,std\n";
  for (const auto& m : models)
    for (Verdict v : kAllVerdicts)
      for (Property p : kAllProperties) {
        const Cell& c = m.per_property[index_of(p)][index_of(v)];
        os << io::csv_field(m.name) << ',' << to_string(v) << ',' << to_string(p) << ',' << pct(c.mean) << ','
           << pct(c.std) << '\n';
      }
  return os.str();
}

std::string comparisons_csv(const std::vector<Comparison>& comparisons) {
  std::ostringstream os;
  os << "model_a,model_b,mean_difference,t,df,t_p,t_degenerate,mcnemar_a_only,mcnemar_b_only,mcnemar_p,"
        "mcnemar_exact\n";
  for (const auto& c : comparisons) {
    os << io::csv_field(c.model_a) << ',' << io::csv_field(c.model_b) << ',';
    if (c.t_test) {
      std::ostringstream t;
      t.precision(17);
      t << c.t_test->mean_difference << ',' << c.t_test->t << ',' << c.t_test->df << ',' << c.t_test->p_value << ','
        << (c.t_test->degenerate ? "true" : "false");
      os << t.str();
    } else {
      os << ",,,,";
    }
    os << ',';
    if (c.mcnemar) {
      std::ostringstream m;
      m.precision(17);
      m << c.mcnemar->a_only << ',' << c.mcnemar->b_only << ',' << c.mcnemar->p_value << ','
        << (c.mcnemar->exact ? "true" : "false");
      os << m.str();
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  return os.str();
}

std::string report_markdown(const std::vector<ModelAccuracy>& sorted, const std::vector<Comparison>& comparisons) {
  std::ostringstream os;
  os << "# Accuracy report\n\n";
  os << "Percentages are mean ± std across runs. Overall is the mean of holds and violated accuracy.\n\n";

  os << "## Overall accuracy\n\n";
  os << "| Rank | Model | Holds | Violated | Overall |\n|---:|---|---:|---:|---:|\n";
  std::size_t rank = 0;
  for (const auto& m : sorted) {
    const auto overall = m.overall();
    os << "| " << ++rank << " | " << md_escape(m.name) << " | " << md_cell(m.holds) << " | " << md_cell(m.violated)
       << " | " << (overall ? pct(overall) : "n/a") << " |\n";
  }

  os << "\n## Accuracy by program length (LOC)\n";
  for (Verdict v : kAllVerdicts) {
    os << "\n### Property " << (v == Verdict::Holds ? "holds" : "violated") << "\n\n| Model |";
    for (LengthBin b : kAllBins) os << ' ' << to_string(b) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < kAllBins.size(); ++i) os << "---:|";
    os << '\n';
    for (const auto& m : sorted) {
      os << "| " << md_escape(m.name) << " |";
      for (LengthBin b : kAllBins) os << ' ' << md_cell(m.per_bin[index_of(b)][index_of(v)]) << " |";
      os << '\n';
    }
  }

  os << "\n## Per-property accuracy\n";
  for (Verdict v : kAllVerdicts) {
    os << "\n### Property " << (v == Verdict::Holds ? "holds" : "violated") << "\n\n| Model | Total |";
    for (Property p : kAllProperties) os << ' ' << judge::property_row_label(p) << " |";
    os << "\n|---|---:|";
    for (std::size_t i = 0; i < kAllProperties.size(); ++i) os << "---:|";
    os << '\n';
    for (const auto& m : sorted) {
      os << "| " << md_escape(m.name) << " | " << md_cell(m.by_verdict(v)) << " |";
      for (Property p : kAllProperties) os << ' ' << md_cell(m.per_property[index_of(p)][index_of(v)]) << " |";
      os << '\n';
    }
  }

  if (!comparisons.empty()) {
    os << "\n## Comparisons\n\n";
    os << "| Model A | Model B | Mean difference | t | df | Paired t-test p | McNemar A-only | McNemar B-only | "
          "McNemar p |\n|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& c : comparisons) {
      os << "| " << md_escape(c.model_a) << " | " << md_escape(c.model_b) << " | ";
      if (c.t_test) {
        os << pct(c.t_test->mean_difference) << " | " << pval(c.t_test->t) << " | " << c.t_test->df << " | "
           << pval(c.t_test->p_value) << (c.t_test->degenerate ? " (zero variance)" : "") << " | ";
      } else {
        os << "n/a | n/a | n/a | n/a | ";
      }
      if (c.mcnemar) {
        os << c.mcnemar->a_only << " | " << c.mcnemar->b_only << " | " << pval(c.mcnemar->p_value)
           << (c.mcnemar->exact ? " (exact)" : " (chi-square)") << " |\n";
      } else {
        os << "n/a | n/a | n/a |\n";
      }
    }
  }
  return os.str();
}

std::string bar_chart_svg(const std::vector<ModelAccuracy>& sorted) {
  const double left = 50, top = 40, plot_h = 240, group_w = 56, bar_w = 20, bottom = 110;
  const double plot_w = group_w * static_cast<double>(std::max<std::size_t>(sorted.size(), 1));
  const double width = left + plot_w + 20, height = top + plot_h + bottom;
  auto y_of = [&](double pctv) { return top + plot_h * (1.0 - std::clamp(pctv, 0.0, 100.0) / 100.0); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect x=\"" << num(left) << "\" y=\"8\" width=\"10\" height=\"10\" fill=\"#4a7bd0\"/><text x=\""
     << num(left + 14) << "\" y=\"17\">Property holds</text>\n";
  os << "<rect x=\"" << num(left + 110) << "\" y=\"8\" width=\"10\" height=\"10\" fill=\"#d0524a\"/><text x=\""
     << num(left + 124) << "\" y=\"17\">Property violated</text>\n";
  os << "<line x1=\"" << num(left + 230) << "\" y1=\"13\" x2=\"" << num(left + 244)
     << "\" y2=\"13\" stroke=\"black\" stroke-width=\"2\"/><text x=\"" << num(left + 248) << "\" y=\"17\">Overall</text>\n";
  for (int g = 0; g <= 100; g += 20) {
    const double y = y_of(g);
    os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w) << "\" y2=\""
       << num(y) << "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 3) << "\" text-anchor=\"end\">" << g << "</text>\n";
  }
  os << "<text x=\"14\" y=\"" << num(top + plot_h / 2) << "\" transform=\"rotate(-90 14 " << num(top + plot_h / 2)
     << ")\" text-anchor=\"middle\">Accuracy (%)</text>\n";

  auto bar = [&](double x, const Cell& c, const char* fill) {
    if (!c.mean) return;
    const double y = y_of(*c.mean);
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w) << "\" height=\""
       << num(top + plot_h - y) << "\" fill=\"" << fill << "\"><title>" << pct(c.mean) << "</title></rect>";
    if (c.std && *c.std > 0) {
      const double cx = x + bar_w / 2;
      os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(*c.mean - *c.std)) << "\" x2=\"" << num(cx)
         << "\" y2=\"" << num(y_of(*c.mean + *c.std)) << "\" stroke=\"black\"/>";
    }
  };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& m = sorted[i];
    const double gx = left + group_w * static_cast<double>(i) + (group_w - 2 * bar_w) / 2;
    os << "<g>";
    bar(gx, m.holds, "#4a7bd0");
    bar(gx + bar_w, m.violated, "#d0524a");
    if (const auto o = m.overall()) {
      const double y = y_of(*o);
      os << "<line x1=\"" << num(gx - 3) << "\" y1=\"" << num(y) << "\" x2=\"" << num(gx + 2 * bar_w + 3)
         << "\" y2=\"" << num(y) << "\" stroke=\"black\" stroke-width=\"2\"/>";
      os << "<text x=\"" << num(gx + bar_w) << "\" y=\"" << num(y - 4) << "\" text-anchor=\"middle\">" << pct(o)
         << "</text>";
    }
    const double lx = gx + bar_w, ly = top + plot_h + 10;
    os << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" transform=\"rotate(-45 "
       << num(lx) << ' ' << num(ly) << ")\">" << xml_escape(m.name) << "</text>";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string length_decay_svg(const std::vector<ModelAccuracy>& models) {
  const double panel_w = 300, panel_h = 220, left = 50, top = 40, gap = 60, legend_w = 190;
  const double width = left + 2 * panel_w + gap + legend_w;
  const double height = std::max(top + panel_h + 50, top + 14.0 * static_cast<double>(models.size()) + 20);
  auto y_of = [&](double pctv) { return top + panel_h * (1.0 - std::clamp(pctv, 0.0, 100.0) / 100.0); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (Verdict v : kAllVerdicts) {
    const double x0 = left + static_cast<double>(index_of(v)) * (panel_w + gap);
    auto x_of = [&](std::size_t bin) { return x0 + panel_w * (static_cast<double>(bin) + 0.5) / 5.0; };
    os << "<text x=\"" << num(x0 + panel_w / 2) << "\" y=\"" << num(top - 14)
       << "\" text-anchor=\"middle\" font-size=\"12\">Property " << (v == Verdict::Holds ? "holds" : "violated")
       << "</text>\n";
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(top) << "\" width=\"" << num(panel_w) << "\" height=\""
       << num(panel_h) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (int g = 0; g <= 100; g += 20) {
      const double y = y_of(g);
      os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0 + panel_w) << "\" y2=\""
         << num(y) << "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/><text x=\"" << num(x0 - 6) << "\" y=\""
         << num(y + 3) << "\" text-anchor=\"end\">" << g << "</text>\n";
    }
    for (LengthBin b : kAllBins)
      os << "<text x=\"" << num(x_of(index_of(b))) << "\" y=\"" << num(top + panel_h + 14)
         << "\" text-anchor=\"middle\">" << to_string(b) << "</text>\n";
    os << "<text x=\"" << num(x0 + panel_w / 2) << "\" y=\"" << num(top + panel_h + 30)
       << "\" text-anchor=\"middle\">Lines of code</text>\n";

    for (std::size_t i = 0; i < models.size(); ++i) {
      const std::string color = series_color(i, models.size());
      std::vector<std::pair<double, double>> run;
      auto flush = [&] {
        if (run.size() >= 2) {
          os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
          for (const auto& [x, y] : run) os << num(x) << ',' << num(y) << ' ';
          os << "\"/>";
        }
        run.clear();
      };
      for (LengthBin b : kAllBins) {
        const Cell& c = models[i].per_bin[index_of(b)][index_of(v)];
        if (!c.mean) {
          flush();
          continue;
        }
        const double x = x_of(index_of(b)), y = y_of(*c.mean);
        run.emplace_back(x, y);
        os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"2\" fill=\"" << color << "\"><title>"
           << xml_escape(models[i].name) << ": " << pct(c.mean) << "</title></circle>";
      }
      flush();
      os << '\n';
    }
  }
  const double lx = left + 2 * panel_w + gap + 10;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double y = top + 14.0 * static_cast<double>(i);
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(y) << "\" x2=\"" << num(lx + 16) << "\" y2=\"" << num(y)
       << "\" stroke=\"" << series_color(i, models.size()) << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 20)
       << "\" y=\"" << num(y + 3) << "\">" << xml_escape(models[i].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const std::vector<ModelAccuracy>& models,
                                               const std::vector<Comparison>& comparisons,
                                               const std::filesystem::path& dir, const ReportOptions& options) {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "report needs at least one model summary");
  std::filesystem::create_directories(dir);
  const auto sorted = sort_by_overall(models);
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& content) {
    io::write_file_atomic(dir / name, content);
    written.push_back(dir / name);
  };
  put("bars.csv", bars_csv(sorted));
  put("length_decay.csv", length_decay_csv(sorted));
  put("per_property.csv", per_property_csv(sorted));
  put("comparisons.csv", comparisons_csv(comparisons));
  put("report.md", report_markdown(sorted, comparisons));
  if (options.svg) {
    put("bars.svg", bar_chart_svg(sorted));
    put("length_decay.svg", length_decay_svg(sorted));
  }
  return written;
}

}  // namespace svbench::report
