#include "mixclt/checks.hpp"

#include <algorithm>
#include <cmath>

namespace mixclt {

const char* to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

CheckOutcome check_le(std::string name, double lhs, double rhs, double slack) {
  CheckOutcome out;
  out.name = std::move(name);
  out.lhs = lhs;
  out.rhs = rhs;
  out.margin = rhs - lhs;
  out.slack = slack;
  const bool ok = std::isfinite(lhs) && !std::isnan(rhs) && lhs <= rhs + slack;
  out.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  return out;
}

CheckOutcome skipped(std::string name, std::string reason) {
  CheckOutcome out;
  out.name = std::move(name);
  out.status = CheckStatus::Skipped;
  out.note = std::move(reason);
  return out;
}

bool any_failed(const std::vector<CheckOutcome>& checks) noexcept {
  return std::any_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.failed(); });
}

}  // namespace mixclt
