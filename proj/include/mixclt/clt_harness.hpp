#pragma once

// CLT condition evaluators, the truncation construction, and the seeded
// Monte-Carlo harness for S_n / sigma_n.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixclt/chain_model.hpp"
#include "mixclt/families.hpp"

namespace mixclt {

/// Exact per-row inputs to the conditions. rho1 values at or below 1e-12 are
/// snapped to 0 (lambda = 1) so that independent rows are recognised.
struct RowQuantities {
  std::size_t n = 0;
  double C = 0.0;
  double rho1 = 0.0;
  double lambda = 1.0;
  double delta1 = 0.0;
  double sigma = 0.0;
  double b = 0.0;

  double alpha() const noexcept { return 1.0 - delta1; }
};

RowQuantities row_quantities(const ChainSpec& spec);
/// Analytic quantities for the Gaussian family; C is +inf for the identity.
RowQuantities row_quantities(const GaussianAr1& model, std::size_t n);

inline constexpr const char* kFlagIndependent = "degenerate_independent";
inline constexpr const char* kFlagContraction = "degenerate_contraction";
inline constexpr const char* kFlagUnbounded = "unbounded";

struct ConditionValue {
  double value = 0.0;
  /// Empty when the value is an ordinary evaluation of the formula.
  std::string flag;
};

/// C |log lambda| / (lambda sigma). lambda = 1 gives 0 flagged independent;
/// lambda = 0 raises DegenerateMixing; sigma = 0 raises ZeroVariance.
ConditionValue condition_dob(const RowQuantities& q);
ConditionValue condition_dob(const ChainSpec& spec);

/// lambda^3 n / |log lambda|^2; lambda = 1 gives +inf flagged independent.
ConditionValue condition_log2(const RowQuantities& q);
ConditionValue condition_log2(const ChainSpec& spec);

/// C^2 / (alpha^3 b^2) with alpha = 1 - delta1; delta1 = 1 gives +inf flagged.
ConditionValue condition_dobrushin_cd(const RowQuantities& q);
ConditionValue condition_dobrushin_cd(const ChainSpec& spec);

/// h(lambda) = lambda / |log lambda|.
double h_weight(double lambda);
/// h'(lambda) = lambda^{3/2} / |log lambda|.
double h_prime_weight(double lambda);

/// (1/(lambda sigma^2)) sum_i E X_i^2 1{|X_i| > eps h(lambda) sigma}.
ConditionValue lindeberg_functional(const ChainSpec& spec, double eps);
/// (1/(lambda^2 b^2)) sum_i E X_i^2 1{|X_i| > eps h'(lambda) b}.
ConditionValue lindeberg_b_functional(const ChainSpec& spec, double eps);
ConditionValue lindeberg_functional(const GaussianAr1& model, std::size_t n, double eps);
ConditionValue lindeberg_b_functional(const GaussianAr1& model, std::size_t n, double eps);

struct TruncatedPair {
  ChainSpec truncated;
  ChainSpec tail;
};

/// f' = f 1{|f| <= T} - E f 1{|f| <= T}, f'' = f - f'; both keep the transitions.
TruncatedPair truncate(const ChainSpec& spec, double T);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double excess_kurtosis = 0.0;
};

/// Raises EmptySample.
SampleMoments sample_moments(const std::vector<double>& sample);

/// Standard normal CDF, 0.5 erfc(-x / sqrt 2) (libm erfc, absolute error well
/// below 1e-15).
double normal_cdf(double x);

/// sup_x |F_sample(x) - Phi(x)| over the sorted sample. Raises EmptySample.
double ks_distance(std::vector<double> sample);

struct NormalizedSums {
  std::vector<double> values;
  double sigma = 0.0;
  /// "exact" (finite rows) or "analytic" (Gaussian family).
  std::string normalization;
};

/// Replicate r draws from PhiloxStream(seed, r); output index r holds
/// S_n / sigma_n of replicate r, whatever the thread count.
NormalizedSums mc_normalized_sums(const TriangularFamily& family, std::size_t n, std::size_t replicates,
                                  std::uint64_t seed);
/// Single-threaded reference.
NormalizedSums mc_normalized_sums_serial(const TriangularFamily& family, std::size_t n, std::size_t replicates,
                                         std::uint64_t seed);

struct ConditionTrace {
  std::string name;
  std::vector<std::size_t> n;
  std::vector<double> value;
  std::vector<std::string> flag;
  /// to_zero, to_infinity, bounded, or degenerate. A grid label, not a limit.
  std::string verdict;
  bool heuristic = true;
};

/// Labels a sequence over an increasing grid.
std::string classify_trend(const std::vector<double>& values);

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  RowQuantities quantities;
  double ks = 0.0;
  SampleMoments moments;
  ConditionValue cond_dob;
  ConditionValue cond_log2;
  ConditionValue cond_cd;
  std::map<double, ConditionValue> lindeberg;
  std::map<double, ConditionValue> lindeberg_b;
  std::string normalization;
  /// Non-empty when this grid point failed; the run continues.
  std::string error;
};

struct ExperimentResult {
  std::string family;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> eps;
  std::vector<ExperimentRow> rows;
  std::vector<ConditionTrace> traces;
};

ExperimentResult run_experiment(const TriangularFamily& family, const std::vector<std::size_t>& n_grid,
                                std::size_t replicates, std::uint64_t seed,
                                const std::vector<double>& eps = {1.0, 0.1, 0.01});

}  // namespace mixclt
