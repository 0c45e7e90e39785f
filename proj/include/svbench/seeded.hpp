#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace svbench {

/// mt19937_64 keyed by a seed plus a list of stream discriminators. Both the
/// engine and std::seed_seq are fully specified, so streams are identical
/// across standard library implementations.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::initializer_list<std::uint32_t> keys = {}) {
  std::vector<std::uint32_t> material = {static_cast<std::uint32_t>(seed),
                                         static_cast<std::uint32_t>(seed >> 32)};
  material.insert(material.end(), keys.begin(), keys.end());
  std::seed_seq seq(material.begin(), material.end());
  return std::mt19937_64(seq);
}

/// Uniform integer in [0, bound) by rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void seeded_shuffle(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace svbench
