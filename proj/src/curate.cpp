#include "svbench/curate.hpp"

#include "svbench/io.hpp"
#include "svbench/seeded.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace svbench::curate {

LengthBin assign_length_bin(std::size_t loc) {
  if (auto bin = try_length_bin(loc)) return *bin;
  throw Error(ErrorCode::OutOfRange, "LOC " + std::to_string(loc) + " is outside 1..400");
}

std::optional<LengthBin> try_length_bin(std::size_t loc) {
  for (LengthBin b : kAllBins) {
    const auto [lo, hi] = bounds_of(b);
    if (loc >= lo && loc <= hi) return b;
  }
  return std::nullopt;
}

std::size_t HoldoutSpec::per_verdict(Verdict v) const {
  const double exact = static_cast<double>(per_property) * holds_fraction;
  const auto holds = static_cast<std::size_t>(std::llround(exact));
  return v == Verdict::Holds ? holds : per_property - holds;
}

std::array<std::size_t, 5> HoldoutSpec::bin_targets(Verdict v) const {
  const std::size_t n = per_verdict(v);
  std::array<std::size_t, 5> out{};
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = n / 5 + (b < n % 5 ? 1 : 0);
  return out;
}

namespace {

std::string describe(const std::vector<SupplyCell>& cells) {
  std::string msg = "insufficient supply for";
  for (const auto& c : cells) {
    msg += " (" + std::string(to_string(c.property)) + ", " + std::string(to_string(c.verdict));
    if (c.bin) msg += ", " + std::string(to_string(*c.bin));
    msg += ": wanted " + std::to_string(c.wanted) + ", have " + std::to_string(c.available) + ")";
  }
  return msg;
}

void validate(const HoldoutSpec& spec) {
  if (spec.per_property == 0)
    throw Error(ErrorCode::InvalidArgument, "per_property must be positive");
  if (!(spec.holds_fraction >= 0.0 && spec.holds_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "holds_fraction must lie in [0, 1]");
  const double exact = static_cast<double>(spec.per_property) * spec.holds_fraction;
  if (std::abs(exact - std::round(exact)) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "verdict split does not divide per_property evenly");
}

// Shuffled candidates per (property, verdict, bin).
struct Pools {
  std::array<std::array<std::array<std::vector<const VerificationTask*>, 5>, 2>, 5> cells;
  std::size_t skipped = 0;
};

Pools make_pools(const std::vector<VerificationTask>& corpus, std::uint64_t seed) {
  Pools pools;
  std::vector<const VerificationTask*> sorted;
  sorted.reserve(corpus.size());
  for (const auto& t : corpus) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id)
      throw Error(ErrorCode::InvalidArgument, "duplicate task id " + sorted[i]->id);
  }
  for (const auto* t : sorted) {
    auto bin = try_length_bin(t->loc);
    if (!bin) {
      ++pools.skipped;
      continue;
    }
    pools.cells[index_of(t->property)][index_of(t->expected)][index_of(*bin)].push_back(t);
  }
  for (Property p : kAllProperties) {
    for (Verdict v : kAllVerdicts) {
      for (LengthBin b : kAllBins) {
        auto& cell = pools.cells[index_of(p)][index_of(v)][index_of(b)];
        auto rng = seeded_engine(seed, {static_cast<std::uint32_t>(index_of(p)),
                                        static_cast<std::uint32_t>(index_of(v)),
                                        static_cast<std::uint32_t>(index_of(b))});
        seeded_shuffle(std::span(cell), rng);
      }
    }
  }
  return pools;
}

Holdout select(const std::vector<VerificationTask>& corpus, const HoldoutSpec& spec, bool relax) {
  validate(spec);
  Pools pools = make_pools(corpus, spec.seed);
  Holdout holdout;
  holdout.spec = spec;
  holdout.skipped_unbinnable = pools.skipped;

  std::vector<SupplyCell> short_cells;
  for (Property p : kAllProperties) {
    for (Verdict v : kAllVerdicts) {
      const auto targets = spec.bin_targets(v);
      const auto& cells = pools.cells[index_of(p)][index_of(v)];
      std::size_t supply = 0;
      for (LengthBin b : kAllBins) {
        const std::size_t have = cells[index_of(b)].size();
        supply += have;
        if (!relax && have < targets[index_of(b)])
          short_cells.push_back({p, v, b, targets[index_of(b)], have});
      }
      if (relax && supply < spec.per_verdict(v))
        short_cells.push_back({p, v, std::nullopt, spec.per_verdict(v), supply});
    }
  }
  if (!short_cells.empty()) throw InsufficientSupply(std::move(short_cells));

  for (Property p : kAllProperties) {
    for (Verdict v : kAllVerdicts) {
      const auto targets = spec.bin_targets(v);
      const auto& cells = pools.cells[index_of(p)][index_of(v)];
      // picks[b]: tasks whose actual LOC falls in bin b, in selection order.
      std::array<std::vector<const VerificationTask*>, 5> picks;
      std::array<std::size_t, 5> used{};
      std::array<std::size_t, 5> shortfall{};
      for (std::size_t b = 0; b < 5; ++b) {
        used[b] = std::min(targets[b], cells[b].size());
        picks[b].assign(cells[b].begin(), cells[b].begin() + static_cast<std::ptrdiff_t>(used[b]));
        shortfall[b] = targets[b] - used[b];
      }
      for (std::size_t b = 0; b < 5; ++b) {
        for (std::size_t dist = 1; dist < 5 && shortfall[b] > 0; ++dist) {
          for (int dir : {-1, 1}) {
            const auto donor = static_cast<std::ptrdiff_t>(b) + dir * static_cast<std::ptrdiff_t>(dist);
            if (donor < 0 || donor >= 5) continue;
            const auto d = static_cast<std::size_t>(donor);
            while (shortfall[b] > 0 && used[d] < cells[d].size()) {
              const VerificationTask* t = cells[d][used[d]++];
              picks[d].push_back(t);
              --shortfall[b];
              holdout.substitutions.push_back(
                  {p, v, kAllBins[b], kAllBins[d], t->id});
            }
          }
        }
      }
      for (std::size_t b = 0; b < 5; ++b) {
        holdout.composition[index_of(p)][index_of(v)][b] = picks[b].size();
        for (const auto* t : picks[b]) holdout.tasks.push_back(*t);
      }
    }
  }
  return holdout;
}

}  // namespace

InsufficientSupply::InsufficientSupply(std::vector<SupplyCell> cells)
    : Error(ErrorCode::InsufficientSupply, describe(cells)), cells_(std::move(cells)) {}

Holdout build_holdout(const std::vector<VerificationTask>& corpus, const HoldoutSpec& spec) {
  return select(corpus, spec, false);
}

Holdout relax_bin_balance(const std::vector<VerificationTask>& corpus, const HoldoutSpec& spec) {
  return select(corpus, spec, true);
}

std::string composition_csv(const Holdout& holdout) {
  std::string out = "property,verdict,bin,count\n";
  for (Property p : kAllProperties)
    for (Verdict v : kAllVerdicts)
      for (LengthBin b : kAllBins)
        out += std::string(to_string(p)) + "," + std::string(to_string(v)) + "," +
               std::string(to_string(b)) + "," +
               std::to_string(holdout.composition[index_of(p)][index_of(v)][index_of(b)]) + "\n";
  return out;
}

void write_holdout(const Holdout& holdout, const std::filesystem::path& dir) {
  std::vector<nlohmann::json> rows;
  rows.reserve(holdout.tasks.size());
  for (const auto& t : holdout.tasks) rows.push_back(to_json(t));
  io::write_jsonl(dir / "holdout.jsonl", rows);
  io::write_file_atomic(dir / "composition.csv", composition_csv(holdout));

  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : holdout.substitutions)
    subs.push_back({{"property", to_string(s.property)},
                    {"verdict", to_string(s.verdict)},
                    {"short_bin", to_string(s.short_bin)},
                    {"donor_bin", to_string(s.donor_bin)},
                    {"task_id", s.task_id}});
  nlohmann::json meta = {{"per_property", holdout.spec.per_property},
                         {"holds_fraction", holdout.spec.holds_fraction},
                         {"seed", holdout.spec.seed},
                         {"skipped_unbinnable", holdout.skipped_unbinnable},
                         {"substitutions", subs}};
  io::write_file_atomic(dir / "holdout_meta.json", meta.dump(2) + "\n");
}

Holdout read_holdout(const std::filesystem::path& dir) {
  Holdout holdout;
  for (const auto& row : io::read_jsonl(dir / "holdout.jsonl")) {
    VerificationTask t = task_from_json(row);
    if (auto bin = try_length_bin(t.loc))
      ++holdout.composition[index_of(t.property)][index_of(t.expected)][index_of(*bin)];
    holdout.tasks.push_back(std::move(t));
  }
  const auto meta_path = dir / "holdout_meta.json";
  if (std::filesystem::exists(meta_path)) {
    const auto meta = nlohmann::json::parse(io::read_file(meta_path));
    holdout.spec.per_property = meta.value("per_property", holdout.spec.per_property);
    holdout.spec.holds_fraction = meta.value("holds_fraction", holdout.spec.holds_fraction);
    holdout.spec.seed = meta.value("seed", holdout.spec.seed);
    holdout.skipped_unbinnable = meta.value("skipped_unbinnable", std::size_t{0});
    for (const auto& s : meta.value("substitutions", nlohmann::json::array())) {
      holdout.substitutions.push_back(
          {*property_from_string(s.at("property").get<std::string>()),
           *verdict_from_string(s.at("verdict").get<std::string>()),
           *length_bin_from_string(s.at("short_bin").get<std::string>()),
           *length_bin_from_string(s.at("donor_bin").get<std::string>()),
           s.at("task_id").get<std::string>()});
    }
  }
  return holdout;
}

}  // namespace svbench::curate
