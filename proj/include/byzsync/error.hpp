#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace byzsync {

enum class ErrorCode {
  NonConvergence,
  NonFinite,
  InfeasibleDesign,
  InfeasibleMitigation,
  WindowNotFull,
  TooManyByzantines,
  DegenerateVariance,
  DegenerateComponent,
  ModeMismatch,
  NoHonestNeighbors,
  ThetaNotPositive,
  SchemaError,
  DimensionMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace byzsync
