#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svbench {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Config,
  MalformedMetadata,
  MultiFileTask,
  OutOfRange,
  InsufficientSupply,
  UnknownTask,
  IncompleteRunSet,
  TooFewRuns,
  InsufficientClassSupply,
  FormatUnavailable,
  Transport,
};

std::string_view to_string(ErrorCode code);

/// Domain error carried by every svbench operation that can fail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svbench
