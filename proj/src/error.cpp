#include "playtime/error.hpp"

namespace playtime {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonDivisiblePartition: return "NonDivisiblePartition";
    case ErrorCode::NoRecordsForPlayer: return "NoRecordsForPlayer";
    case ErrorCode::PeriodOutOfRange: return "PeriodOutOfRange";
    case ErrorCode::SlotOutOfRange: return "SlotOutOfRange";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::UnsmoothedZeroReference: return "UnsmoothedZeroReference";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NoRecordsForPlayer:
    case ErrorCode::InvalidInput:
      return ErrorKind::Input;
    case ErrorCode::EmptyPopulation:
    case ErrorCode::DegenerateLabels:
      return ErrorKind::Degenerate;
    default:
      return ErrorKind::Config;
  }
}

}  // namespace playtime
