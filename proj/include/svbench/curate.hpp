#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svbench/corpus.hpp"
#include "svbench/domain.hpp"
#include "svbench/error.hpp"

namespace svbench::curate {

/// Maps a LOC count to its bin. Throws Error{OutOfRange} for 0 or > 400.
LengthBin assign_length_bin(std::size_t loc);
std::optional<LengthBin> try_length_bin(std::size_t loc);

struct HoldoutSpec {
  std::size_t per_property = 100;
  double holds_fraction = 0.5;
  std::uint64_t seed = 0;

  std::size_t total() const { return per_property * kAllProperties.size(); }
  std::size_t per_verdict(Verdict v) const;
  /// Tasks wanted in each bin of one (property, verdict) cell; sizes differ by
  /// at most one, lower bins taking the remainder.
  std::array<std::size_t, 5> bin_targets(Verdict v) const;
};

using Composition = std::array<std::array<std::array<std::size_t, 5>, 2>, 5>;

/// A task drawn from a neighbouring bin to cover a shortfall.
struct Substitution {
  Property property;
  Verdict verdict;
  LengthBin short_bin;
  LengthBin donor_bin;
  std::string task_id;
};

struct Holdout {
  std::vector<VerificationTask> tasks;
  HoldoutSpec spec;
  Composition composition{};
  std::vector<Substitution> substitutions;
  std::size_t skipped_unbinnable = 0;
};

struct SupplyCell {
  Property property;
  Verdict verdict;
  std::optional<LengthBin> bin;  // absent when the whole (property, verdict) pair is short
  std::size_t wanted = 0;
  std::size_t available = 0;
};

class InsufficientSupply : public Error {
 public:
  explicit InsufficientSupply(std::vector<SupplyCell> cells);
  const std::vector<SupplyCell>& cells() const { return cells_; }

 private:
  std::vector<SupplyCell> cells_;
};

/// Stratified selection over property x verdict x bin. Within a cell,
/// candidates are sorted by id and then shuffled by a stream keyed on
/// (seed, cell), so the result does not depend on corpus order. Throws
/// InsufficientSupply naming every short cell.
Holdout build_holdout(const std::vector<VerificationTask>& corpus, const HoldoutSpec& spec);

/// As build_holdout, but bin shortfalls are covered from the nearest bins with
/// surplus (lower bin first on ties). Property and verdict counts stay exact.
Holdout relax_bin_balance(const std::vector<VerificationTask>& corpus, const HoldoutSpec& spec);

/// holdout.jsonl + composition.csv + holdout_meta.json under `dir`.
void write_holdout(const Holdout& holdout, const std::filesystem::path& dir);
Holdout read_holdout(const std::filesystem::path& dir);
std::string composition_csv(const Holdout& holdout);

}  // namespace svbench::curate
