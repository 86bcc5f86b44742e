#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace playtime {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  Config,      // invalid parameters (exit 2)
  Input,       // malformed or missing input data (exit 3)
  Degenerate,  // data cannot support the request, e.g. one class only (exit 4)
};

enum class ErrorCode {
  NonDivisiblePartition,
  NoRecordsForPlayer,
  PeriodOutOfRange,
  SlotOutOfRange,
  EmptyPopulation,
  EmptyDistribution,
  SupportMismatch,
  UnsmoothedZeroReference,
  SchemeMismatch,
  DegenerateLabels,
  DimensionMismatch,
  InvalidConfig,
  InvalidInput,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace playtime
