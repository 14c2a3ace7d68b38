#pragma once

// Maximal-correlation and contraction coefficients of a chain row.
//
// For a pair of finite random variables with joint law J and marginals p, q,
// the maximal correlation sup |corr(f(U), g(V))| equals the second singular
// value of M(x, y) = J(x, y) / sqrt(p(x) q(y)). Sketch: the map g -> E(g(V) | U)
// written in the orthonormal bases {1{U=x}/sqrt(p(x))}, {1{V=y}/sqrt(q(y))} is
// M. Its top singular pair is (sqrt p, sqrt q) with value 1 (constants), and
// restricting to mean-zero functions removes exactly that pair, so the
// supremum is the next singular value. We compute it as the top singular
// value of M - sqrt(p) sqrt(q)^T. States with zero mass carry no L2 mass and
// are dropped before normalizing.
//
// For Markov rows the lag-k coefficient between the past and the future
// reduces to single coordinates, rho_k = max_s rho(xi_s, xi_{s+k}).

#include <vector>

#include <Eigen/Dense>

#include "mixclt/chain_model.hpp"
#include "mixclt/checks.hpp"

namespace mixclt {

struct CoefficientReport {
  std::size_t m = 0;
  std::size_t n = 0;
  /// rho_k[k-1] for lags k = 1..n-1.
  std::vector<double> rho_k;
  double rho1 = 0.0;
  /// 1 - rho1.
  double lambda = 1.0;
  /// delta(Q_i) for each step i = 0..n-2.
  std::vector<double> delta_steps;
  double delta1 = 0.0;
  /// rho_k <= rho1^k for each k, then rho1 <= sqrt(delta1).
  std::vector<CheckOutcome> checks;

  double alpha() const noexcept { return 1.0 - delta1; }
};

/// Second singular value of the normalized joint matrix, clamped to [0, 1];
/// values within 1e-12 of 0 or 1 are reported as exactly 0 or 1.
/// Raises DegenerateJoint when J is not a probability matrix.
double max_correlation(const Eigen::MatrixXd& joint);
inline double max_correlation(const JointLaw& joint) { return max_correlation(joint.J); }

/// Entry k-1 is max_s max_correlation(joint_law(s, k)); parallel over s.
std::vector<double> rho_k_sequence(const ChainSpec& spec);
/// Single-threaded reference for rho_k_sequence.
std::vector<double> rho_k_sequence_serial(const ChainSpec& spec);

struct Rho1Lambda {
  double rho1 = 0.0;
  double lambda = 1.0;
};

/// Lag-1 maximal correlation over the row. For n = 1 there is no pair and
/// rho1 = 0, lambda = 1.
Rho1Lambda rho1_lambda(const ChainSpec& spec);
Rho1Lambda rho1_lambda(const ChainSpec& spec, const MarginalLaws& laws);

/// Maximum total-variation distance between two rows of Q.
double delta_coefficient(const Eigen::MatrixXd& q);

std::vector<double> delta_steps(const ChainSpec& spec);
/// max_i delta(Q_i); 0 when n = 1.
double delta1(const ChainSpec& spec);

CoefficientReport coefficient_report(const ChainSpec& spec);

/// true when rho_k <= rho^k + slack for every lag.
bool geometric_domination(const std::vector<double>& rho_k, double rho, double slack);

}  // namespace mixclt
