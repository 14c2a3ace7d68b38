#pragma once

// Built-in triangular arrays: maps n -> row, with closed-form metadata where
// it is known.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixclt/chain_model.hpp"
#include "mixclt/rng.hpp"

namespace mixclt {

struct AnalyticMetadata {
  std::optional<double> rho1;
  std::optional<double> lambda;
  std::optional<double> delta1;
  std::optional<double> sigma2;
};

/// a_n as a function of the row length, with its source text.
struct RateExpr {
  enum class Kind { Constant, OverN, Power, MinHalfOverN };
  Kind kind = Kind::Constant;
  double c = 0.0;
  double g = 0.0;

  double operator()(std::size_t n) const;
  std::string to_string() const;
};

/// Grammar: `c`, `c/n`, `c*n^(-g)` (also written `c/n^g`). The symbol `c`
/// may stand for either number and is then taken from `c_binding`.
RateExpr parse_rate(const std::string& text, std::optional<double> c_binding = std::nullopt);

/// Observation catalog for the Gaussian family; both entries are odd, so the
/// stationary mean is 0 exactly.
struct GaussianObservation {
  enum class Kind { Identity, Clip };
  Kind kind = Kind::Identity;
  /// Clip level for Kind::Clip: f(x) = sign(x) min(|x|, clip).
  double clip = 1.0;

  double operator()(double x) const noexcept {
    if (kind == Kind::Identity) return x;
    return x > clip ? clip : (x < -clip ? -clip : x);
  }
  std::string to_string() const;
};

/// Stationary Gaussian AR(1) row: xi_0 ~ N(0,1),
/// xi_{i+1} = phi xi_i + sqrt(1 - phi^2) z_i.
class GaussianAr1 {
 public:
  GaussianAr1(double phi, GaussianObservation f);

  double phi() const noexcept { return phi_; }
  const GaussianObservation& observation() const noexcept { return f_; }

  /// var f(Z) for Z ~ N(0,1).
  double stationary_variance() const noexcept { return variance_; }
  /// Cov(f(xi_0), f(xi_k)).
  double lag_covariance(std::size_t k) const;
  /// Exact var S_n.
  double sigma2(std::size_t n) const;

  /// S_n along one path; consumes exactly n normals from the stream.
  double sample_sum(PhiloxStream& stream, std::size_t n) const;

 private:
  double phi_;
  GaussianObservation f_;
  double variance_ = 1.0;
  // Squared normalized Hermite coefficients a_j^2, j >= 1.
  std::vector<double> hermite_sq_;
};

struct TriangularFamily {
  std::string name;
  std::string descriptor;
  std::string description;
  /// Empty for the sampler-only Gaussian family.
  std::function<ChainSpec(std::size_t)> make_row;
  std::function<AnalyticMetadata(std::size_t)> analytic;
  std::optional<GaussianAr1> gaussian;

  bool finite() const noexcept { return static_cast<bool>(make_row); }
};

/// Every transition row equals pi; f must be centered under pi.
TriangularFamily family_iid(const Eigen::VectorXd& pi, const Eigen::VectorXd& f);
/// Uniform two-state iid +-1 variables.
TriangularFamily family_iid();

/// Symmetric two-state chain, flip probability a_n, uniform start, f = (-1, +1).
/// Raises InvalidRate when a row is requested with a_n outside (0, 0.5].
TriangularFamily family_two_state(RateExpr rate);

/// Two-state chain with a_n = min(0.5, c/n): O(1) expected sign flips per row.
TriangularFamily family_degenerate(double c);

/// Seeded random rows: transition rows are normalized draws u^kappa (kappa
/// from {1, 4, 12} by seed), each step redrawn until its lag-1 coefficient is
/// at most 1 - mixing_floor; f uniform on [-1, 1] then centered.
/// Raises RejectionBudgetExceeded after 10^4 redraws in one row.
TriangularFamily family_random(std::size_t m, std::uint64_t seed, double mixing_floor);

TriangularFamily family_gaussian_ar1(double phi, GaussianObservation f);

/// Closed form n + 2 sum_{k<n} (n-k) r^k.
double two_state_sigma2(std::size_t n, double r);

/// Parses `name:key=value,...`:
///   iid[:pi=p0/p1/...,f=f0/f1/...]
///   two-state:a=RATE
///   degenerate:c=NUM
///   random:m=INT,seed=U64,floor=NUM
///   gaussian-ar1:phi=NUM[,f=identity|clip][,clip=NUM]
TriangularFamily parse_family(const std::string& descriptor, std::optional<double> c_binding = std::nullopt);

struct FamilyInfo {
  std::string name;
  std::string usage;
  std::string description;
};

std::vector<FamilyInfo> builtin_families();

}  // namespace mixclt
