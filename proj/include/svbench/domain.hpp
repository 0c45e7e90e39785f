#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace svbench {

enum class Property { MemorySafety, NoOverflow, Termination, Reachability, NoDataRace };
enum class Verdict { Holds, Violated };
enum class DataModel { ILP32, LP64 };

/// Program-length bins used for balancing and for length-decay reports.
enum class LengthBin { B0_25, B26_50, B51_100, B101_200, B201_400 };

inline constexpr std::array<Property, 5> kAllProperties = {
    Property::MemorySafety, Property::NoOverflow, Property::Termination,
    Property::Reachability, Property::NoDataRace};
inline constexpr std::array<Verdict, 2> kAllVerdicts = {Verdict::Holds, Verdict::Violated};
inline constexpr std::array<LengthBin, 5> kAllBins = {
    LengthBin::B0_25, LengthBin::B26_50, LengthBin::B51_100, LengthBin::B101_200,
    LengthBin::B201_400};

constexpr std::size_t index_of(Property p) { return static_cast<std::size_t>(p); }
constexpr std::size_t index_of(Verdict v) { return static_cast<std::size_t>(v); }
constexpr std::size_t index_of(LengthBin b) { return static_cast<std::size_t>(b); }

// Enum names as written in JSON and CSV outputs ("MemorySafety", "Holds", "0-25", ...).
std::string_view to_string(Property p);
std::string_view to_string(Verdict v);
std::string_view to_string(DataModel m);
std::string_view to_string(LengthBin b);

std::optional<Property> property_from_string(std::string_view s);
std::optional<Verdict> verdict_from_string(std::string_view s);
std::optional<DataModel> data_model_from_string(std::string_view s);
std::optional<LengthBin> length_bin_from_string(std::string_view s);

/// SV-COMP property file stem, e.g. "unreach-call" for Reachability.
std::string_view svcomp_property_name(Property p);
std::optional<Property> property_from_svcomp_name(std::string_view stem);

/// Inclusive LOC bounds of a bin.
struct BinBounds {
  std::size_t lo;
  std::size_t hi;
};
BinBounds bounds_of(LengthBin b);

}  // namespace svbench
