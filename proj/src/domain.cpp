#include "svbench/domain.hpp"

#include "svbench/error.hpp"

#include <algorithm>
#include <cctype>

namespace svbench {

namespace {

constexpr std::array<std::string_view, 5> kPropertyNames = {
    "MemorySafety", "NoOverflow", "Termination", "Reachability", "NoDataRace"};
constexpr std::array<std::string_view, 5> kSvcompNames = {
    "valid-memsafety", "no-overflow", "termination", "unreach-call", "no-data-race"};
constexpr std::array<std::string_view, 2> kVerdictNames = {"Holds", "Violated"};
constexpr std::array<std::string_view, 2> kDataModelNames = {"ILP32", "LP64"};
constexpr std::array<std::string_view, 5> kBinNames = {"0-25", "26-50", "51-100", "101-200",
                                                       "201-400"};
constexpr std::array<BinBounds, 5> kBinBounds = {
    BinBounds{1, 25}, BinBounds{26, 50}, BinBounds{51, 100}, BinBounds{101, 200},
    BinBounds{201, 400}};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  auto it = std::find(names.begin(), names.end(), s);
  if (it == names.end()) return std::nullopt;
  return static_cast<Enum>(it - names.begin());
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::MalformedMetadata: return "MalformedMetadata";
    case ErrorCode::MultiFileTask: return "MultiFileTask";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientSupply: return "InsufficientSupply";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::IncompleteRunSet: return "IncompleteRunSet";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::InsufficientClassSupply: return "InsufficientClassSupply";
    case ErrorCode::FormatUnavailable: return "FormatUnavailable";
    case ErrorCode::Transport: return "Transport";
  }
  return "Unknown";
}

std::string_view to_string(Property p) { return kPropertyNames[index_of(p)]; }
std::string_view to_string(Verdict v) { return kVerdictNames[index_of(v)]; }
std::string_view to_string(DataModel m) { return kDataModelNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(LengthBin b) { return kBinNames[index_of(b)]; }

std::optional<Property> property_from_string(std::string_view s) {
  return lookup<Property>(kPropertyNames, s);
}
std::optional<Verdict> verdict_from_string(std::string_view s) {
  return lookup<Verdict>(kVerdictNames, s);
}
std::optional<DataModel> data_model_from_string(std::string_view s) {
  return lookup<DataModel>(kDataModelNames, s);
}
std::optional<LengthBin> length_bin_from_string(std::string_view s) {
  return lookup<LengthBin>(kBinNames, s);
}

std::string_view svcomp_property_name(Property p) { return kSvcompNames[index_of(p)]; }
std::optional<Property> property_from_svcomp_name(std::string_view stem) {
  return lookup<Property>(kSvcompNames, stem);
}

BinBounds bounds_of(LengthBin b) { return kBinBounds[index_of(b)]; }

}  // namespace svbench
