#include "byzsync/error.hpp"

namespace byzsync {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InfeasibleDesign: return "InfeasibleDesign";
    case ErrorCode::InfeasibleMitigation: return "InfeasibleMitigation";
    case ErrorCode::WindowNotFull: return "WindowNotFull";
    case ErrorCode::TooManyByzantines: return "TooManyByzantines";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::NoHonestNeighbors: return "NoHonestNeighbors";
    case ErrorCode::ThetaNotPositive: return "ThetaNotPositive";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace byzsync
