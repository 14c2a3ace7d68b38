#pragma once

#include <string>
#include <vector>

namespace mixclt {

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus status) noexcept;

/// One numeric inequality lhs <= rhs. margin = rhs - lhs, so a negative
/// margin within the slack still passes.
struct CheckOutcome {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double slack = 0.0;
  CheckStatus status = CheckStatus::Skipped;
  std::string note;

  bool passed() const noexcept { return status == CheckStatus::Pass; }
  bool failed() const noexcept { return status == CheckStatus::Fail; }
};

/// Evaluates lhs <= rhs + slack.
CheckOutcome check_le(std::string name, double lhs, double rhs, double slack);
CheckOutcome skipped(std::string name, std::string reason);

bool any_failed(const std::vector<CheckOutcome>& checks) noexcept;

}  // namespace mixclt
