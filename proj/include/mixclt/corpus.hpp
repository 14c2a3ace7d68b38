#pragma once

// The randomized verification corpus and the per-spec check battery shared
// by `selftest` and the acceptance suite.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mixclt/chain_model.hpp"
#include "mixclt/checks.hpp"

namespace mixclt {

/// Check groups: coefficients, variance, delta, est1, oracle, martingale, ppower, exp.
const std::vector<std::string>& check_groups();

struct VerifyOptions {
  std::set<std::string> groups{check_groups().begin(), check_groups().end()};
  std::vector<double> p_orders{2.0, 2.5, 3.0, 4.0};
  double rel = 1e-9;
  /// Pathwise martingale residual and the exponential check enumerate paths up to this size.
  std::uint64_t enumeration_cap = kEnumerationCap;
  /// Path-enumeration oracle for var S_n runs up to this size.
  std::uint64_t oracle_enumeration_cap = 100'000;
};

struct SpecVerification {
  std::string name;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<CheckOutcome> checks;

  bool failed() const noexcept { return any_failed(checks); }
};

/// Runs every selected check group on one centered spec.
SpecVerification verify_spec(const ChainSpec& spec, const VerifyOptions& options);

/// Random rows with m in [2, max_m], n in [1, max_n]; every eighth entry is an
/// iid row (the sharpness case). Deterministic per (master_seed, count, max_m, max_n).
std::vector<ChainSpec> random_corpus(std::uint64_t master_seed, std::size_t count, std::size_t max_m,
                                     std::size_t max_n);

/// Finite built-in families evaluated on n in {2, 3, 5, 8, 13, 21}.
std::vector<ChainSpec> family_corpus();

/// verify_spec over a corpus, parallel over specs; output in corpus order.
std::vector<SpecVerification> verify_corpus(const std::vector<ChainSpec>& corpus, const VerifyOptions& options);
/// Single-threaded reference.
std::vector<SpecVerification> verify_corpus_serial(const std::vector<ChainSpec>& corpus,
                                                   const VerifyOptions& options);

struct GroupSummary {
  std::string group;
  std::size_t evaluated = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  /// Smallest (margin + slack) among evaluated checks; negative means failure.
  double worst_headroom = 0.0;
  std::string worst_check;
};

/// Groups checks by the name prefix before '[' and tallies them in corpus order.
std::vector<GroupSummary> summarize(const std::vector<SpecVerification>& results);

}  // namespace mixclt
