#pragma once

#include <stdexcept>
#include <string>

namespace mixclt {

enum class ErrorKind {
  DimensionMismatch,
  NotStochastic,
  NotCentered,
  IndexOutOfRange,
  StateSpaceTooLarge,
  DegenerateJoint,
  InvalidOrder,
  InvalidT,
  InvalidRate,
  InvalidPhi,
  InvalidArgument,
  RejectionBudgetExceeded,
  DegenerateMixing,
  DegenerateContraction,
  ZeroVariance,
  EmptySample,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mixclt
