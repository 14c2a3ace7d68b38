#include "mixclt/error.hpp"

namespace mixclt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NotCentered: return "NotCentered";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::DegenerateJoint: return "DegenerateJoint";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::InvalidT: return "InvalidT";
    case ErrorKind::InvalidRate: return "InvalidRate";
    case ErrorKind::InvalidPhi: return "InvalidPhi";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorKind::DegenerateMixing: return "DegenerateMixing";
    case ErrorKind::DegenerateContraction: return "DegenerateContraction";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace mixclt
