#pragma once

// Finite-state non-homogeneous Markov chain rows.
//
// One row of a triangular array is a chain xi_0, ..., xi_{n-1} on states
// 0..m-1 (steps are 0-based throughout the library), an initial law, n-1
// transition matrices and n observation functions, X_i = f_i(xi_i).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixclt/rng.hpp"

namespace mixclt {

using State = std::uint32_t;

struct ChainSpec {
  std::size_t m = 1;
  std::size_t n = 1;
  Eigen::VectorXd initial;
  /// transitions[i](x, y) = P(xi_{i+1} = y | xi_i = x), i = 0..n-2.
  std::vector<Eigen::MatrixXd> transitions;
  /// f[i](x) is the observation at step i in state x, i = 0..n-1.
  std::vector<Eigen::VectorXd> f;
  std::string name;
};

struct MarginalLaws {
  std::vector<Eigen::VectorXd> pi;
};

/// J(x, y) = P(xi_s = x, xi_{s+k} = y).
struct JointLaw {
  std::size_t s = 0;
  std::size_t k = 1;
  Eigen::MatrixXd J;
};

/// Default cap on m^n for exhaustive path enumeration.
inline constexpr std::uint64_t kEnumerationCap = 2'000'000;

/// Checks dimensions and stochasticity. With `center` set, each f_i is
/// replaced by f_i - E f_i(xi_i) under the exact marginals; otherwise a mean
/// above 1e-10 raises NotCentered.
ChainSpec validate(const ChainSpec& spec, bool center);

MarginalLaws marginals(const ChainSpec& spec);

/// Requires s + k < n and k >= 1.
JointLaw joint_law(const ChainSpec& spec, const MarginalLaws& laws, std::size_t s, std::size_t k);
JointLaw joint_law(const ChainSpec& spec, std::size_t s, std::size_t k);

/// Inverse-CDF path sampler. Each path consumes exactly one uniform per step
/// (n uniforms), the first one for the initial law.
class PathSampler {
 public:
  explicit PathSampler(const ChainSpec& spec);

  void sample(PhiloxStream& stream, std::span<State> path) const;
  /// S_n = sum_i f_i(xi_i) along a freshly sampled path, without storing it.
  double sample_sum(PhiloxStream& stream) const;

  std::size_t length() const noexcept { return n_; }

 private:
  State draw(std::span<const double> cdf, double u) const noexcept;

  std::size_t m_;
  std::size_t n_;
  // initial cdf followed by (n-1)*m row cdfs, each of length m.
  std::vector<double> cdf_;
  // n*m observation values.
  std::vector<double> f_;
};

std::vector<State> sample_path(const ChainSpec& spec, PhiloxStream& stream);

/// m^n, saturating at UINT64_MAX.
std::uint64_t path_count(std::size_t m, std::size_t n) noexcept;

using PathVisitor = std::function<void(std::span<const State> path, double probability)>;

/// Visits every positive-probability path in lexicographic order.
void for_each_path(const ChainSpec& spec, const PathVisitor& visit,
                   std::uint64_t cap = kEnumerationCap);

/// Sum over all paths of P(path) * functional(path), compensated.
double enumerate_expectation(const ChainSpec& spec,
                             const std::function<double(std::span<const State>)>& functional,
                             std::uint64_t cap = kEnumerationCap);

/// S_n along a path.
double path_sum(const ChainSpec& spec, std::span<const State> path);

}  // namespace mixclt
