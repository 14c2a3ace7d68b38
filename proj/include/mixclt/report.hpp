#pragma once

// JSON / CSV / gnuplot serialization of reports. Non-finite numbers are
// written as the strings "inf", "-inf", "nan" in JSON and as bare tokens in
// CSV. CSV numbers use 17 significant digits.

#include <string>
#include <vector>

#include <json.hpp>

#include "mixclt/checks.hpp"
#include "mixclt/clt_harness.hpp"
#include "mixclt/coefficients.hpp"
#include "mixclt/corpus.hpp"
#include "mixclt/moments.hpp"

namespace mixclt {

nlohmann::json json_number(double x);
std::string csv_number(double x);

nlohmann::json to_json(const CheckOutcome& check);
nlohmann::json to_json(const std::vector<CheckOutcome>& checks);
nlohmann::json to_json(const CoefficientReport& report);
nlohmann::json to_json(const MomentReport& report);
nlohmann::json to_json(const ExperimentResult& result);
nlohmann::json to_json(const SpecVerification& verification);
nlohmann::json to_json(const GroupSummary& summary);

/// k, rho_k, rho1_pow_k, delta1, sqrt_delta1, delta1_pow_k
std::string to_csv(const CoefficientReport& report);
/// check_name, lhs, rhs, margin, status
std::string to_csv(const std::vector<CheckOutcome>& checks);
/// n, lambda, sigma, ks, cond_dob, cond_log2, cond_cd, flags
std::string to_csv(const ExperimentResult& result);
/// group,evaluated,passed,failed,skipped,worst_headroom,worst_check
std::string to_csv(const std::vector<GroupSummary>& summary);

/// Two-column gnuplot data: n vs KS.
std::string ks_plot_data(const ExperimentResult& result);
/// n vs the named condition trace.
std::string condition_plot_data(const ExperimentResult& result, const std::string& trace);

}  // namespace mixclt
