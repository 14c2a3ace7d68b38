#pragma once

// Exact second moments, tail conditional expectations and the martingale
// decomposition of S_n for a centered chain row, plus numeric checks of the
// variance bounds and the moment / exponential inequalities for
// A_j = E(S_n - S_j | xi_j).
//
// With g_j(x) = E(S_n - S_j | xi_j = x) the martingale differences are
//   d_j = f_j(xi_j) + g_j(xi_j) - g_{j-1}(xi_{j-1}),   g_{-1} := E S_n = 0,
// which telescope to S_n and are orthogonal, so sum_j E d_j^2 = var S_n.

#include <map>
#include <optional>
#include <vector>

#include "mixclt/chain_model.hpp"
#include "mixclt/checks.hpp"
#include "mixclt/coefficients.hpp"

namespace mixclt {

/// g[j](x) = E(S_n - S_j | xi_j = x); g[n-1] = 0.
struct TailConditional {
  std::vector<Eigen::VectorXd> g;
};

double b_squared(const ChainSpec& spec, const MarginalLaws& laws);
double b_squared(const ChainSpec& spec);

/// var S_n by the O(n m^2) forward recursion on h_j(x) = E(S_j 1{xi_j = x}).
double sigma_squared(const ChainSpec& spec, const MarginalLaws& laws);
double sigma_squared(const ChainSpec& spec);

/// var S_n as the double sum of covariances, O(n^2 m^2). Independent route.
double sigma_squared_covariance_sum(const ChainSpec& spec, const MarginalLaws& laws);
double sigma_squared_covariance_sum(const ChainSpec& spec);

/// Backward recursion g_j = Q_j (f_{j+1} + g_{j+1}).
TailConditional tail_conditional(const ChainSpec& spec);

/// sum_j E|A_j|^p. Raises InvalidOrder for p < 2.
double A_moments(const MarginalLaws& laws, const TailConditional& tc, double p);
double A_moments(const ChainSpec& spec, const TailConditional& tc, double p);

/// sum_i E|X_i|^p.
double X_moments(const ChainSpec& spec, const MarginalLaws& laws, double p);

/// Essential sup of |X_i| over the row: max |f_i(x)| over states with pi_i(x) > 0.
double essential_bound(const ChainSpec& spec, const MarginalLaws& laws);

struct MartingaleResiduals {
  /// max over paths of |sum_j d_j - S_n|; empty when m^n exceeds the cap.
  std::optional<double> pathwise;
  /// |sum_j E d_j^2 - sigma^2|.
  double orthogonality = 0.0;
  double sum_Ed2 = 0.0;
  std::vector<double> Ed2;
};

MartingaleResiduals martingale_check(const ChainSpec& spec, std::uint64_t cap = kEnumerationCap);

/// Quantities shared by every check; computed once per spec.
struct ChainAnalysis {
  ChainSpec spec;
  MarginalLaws laws;
  CoefficientReport coefficients;
  TailConditional tail;
  double b2 = 0.0;
  double sigma2 = 0.0;
  /// essential sup of |X_i|.
  double C = 0.0;
};

ChainAnalysis analyze(const ChainSpec& spec);

/// Lower bound always (rho1 <= 1); upper bound only when rho1 < 1, otherwise
/// reported skipped. Also asserts (1-rho)/(1+rho) == lambda/(2-lambda).
std::vector<CheckOutcome> variance_bounds_check(const ChainAnalysis& a, double rel = 1e-9);
/// Contraction form; skipped entirely when delta1 = 1.
std::vector<CheckOutcome> delta_variance_bounds_check(const ChainAnalysis& a, double rel = 1e-9);
/// sigma^2 >= (1 - rho1^2) / rho1^2 * sum_i E A_i^2; skipped for rho1 in {0, 1}.
CheckOutcome est1_check(const ChainAnalysis& a, double rel = 1e-9);
/// Both parts of the p-th moment bound on sum_j E|A_j|^p.
std::vector<CheckOutcome> lemma_ppower_check(const ChainAnalysis& a, double p, double rel = 1e-9);

/// Largest admissible t, (1 - rho1) / (6 C).
double exp_t_max(const ChainAnalysis& a);
/// E exp(t max_j |A_j|) for each t, by one exhaustive pass over the paths.
std::vector<double> exp_moment_of_max_tail(const ChainAnalysis& a, const std::vector<double>& ts,
                                           std::uint64_t cap = kEnumerationCap);
/// One check per t (InvalidT if a t exceeds exp_t_max) plus the t = t_max
/// specialised form against (1 + b/(3C))^2.
std::vector<CheckOutcome> lemma_exp_check(const ChainAnalysis& a, const std::vector<double>& ts,
                                          double rel = 1e-9, std::uint64_t cap = kEnumerationCap);
std::vector<CheckOutcome> lemma_exp_check(const ChainSpec& spec, double t);

struct MomentReport {
  double b2 = 0.0;
  double sigma2 = 0.0;
  double sigma2_oracle = 0.0;
  /// Path-enumeration value of E S_n^2 when m^n <= 1e5.
  std::optional<double> sigma2_enumerated;
  std::map<double, double> EA_p;
  double mart_residual = 0.0;
  std::optional<double> pathwise_residual;
  std::vector<CheckOutcome> bound_checks;
};

/// Moment core plus every bound check at the given orders p and admissible t grid.
MomentReport moment_report(const ChainAnalysis& a, const std::vector<double>& p_orders,
                           double rel = 1e-9);

/// t_max * {0.1, 0.25, 0.5, 0.75, 1}.
std::vector<double> default_exp_grid(const ChainAnalysis& a);

}  // namespace mixclt
