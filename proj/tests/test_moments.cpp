#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mixclt/error.hpp"
#include "mixclt/families.hpp"
#include "mixclt/moments.hpp"

using namespace mixclt;

namespace {

ChainSpec three_state_single_f() {
  ChainSpec spec = fixtures::product_chain(Eigen::Vector3d::Constant(1.0 / 3.0), Eigen::Vector3d::Zero(), 3);
  spec.f[0] = Eigen::Vector3d(-1.0, 0.0, 1.0);
  return spec;
}

ChainSpec product3(std::size_t n) {
  ChainSpec spec = fixtures::product_chain(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Vector3d(-1.3, -0.3, 0.7), n);
  return validate(spec, true);
}

// var S_n as sum_{s,t} E X_s X_t with explicit matrix powers, long double.
double covariance_oracle(const ChainSpec& spec) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  std::vector<VecL> pi(spec.n);
  pi[0] = spec.initial.cast<long double>();
  for (std::size_t i = 1; i < spec.n; ++i)
    pi[i] = (pi[i - 1].transpose() * spec.transitions[i - 1].cast<long double>()).transpose();
  long double total = 0.0L;
  for (std::size_t s = 0; s < spec.n; ++s) {
    MatL prod = MatL::Identity(spec.m, spec.m);
    for (std::size_t t = s; t < spec.n; ++t) {
      if (t > s) prod = prod * spec.transitions[t - 1].cast<long double>();
      const VecL fs = spec.f[s].cast<long double>();
      const VecL ft = spec.f[t].cast<long double>();
      const long double term = (pi[s].cwiseProduct(fs)).dot(prod * ft);
      total += (t == s ? 1.0L : 2.0L) * term;
    }
  }
  return static_cast<double>(total);
}

const CheckOutcome& find(const std::vector<CheckOutcome>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return c;
  FAIL("no check named " << name);
  return checks.front();
}

}  // namespace

TEST_CASE("b_squared examples") {
  CHECK(std::fabs(b_squared(fixtures::two_state(0.25, 3)) - 3.0) <= 1e-12);
  CHECK(b_squared(fixtures::two_state(0.25, 3)) == 3.0);
  CHECK(b_squared(fixtures::product_chain(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d::Zero(), 4)) == 0.0);
  CHECK(std::fabs(b_squared(three_state_single_f()) - 2.0 / 3.0) <= 1e-15);
}

TEST_CASE("sigma_squared examples") {
  const auto p = product3(6);
  CHECK(std::fabs(sigma_squared(p) - b_squared(p)) <= 1e-12);
  CHECK(std::fabs(sigma_squared(fixtures::two_state(0.25, 3)) - 5.5) <= 1e-12);
  CHECK(std::fabs(sigma_squared(fixtures::two_state(0.5, 5)) - 5.0) <= 1e-12);
  // Closed form n + 2 sum_{k<n}(n-k) r^k for longer rows.
  for (std::size_t n : {2u, 7u, 20u}) {
    double closed = static_cast<double>(n);
    for (std::size_t k = 1; k < n; ++k) closed += 2.0 * static_cast<double>(n - k) * std::pow(0.6, k);
    CHECK(std::fabs(sigma_squared(fixtures::two_state(0.2, n)) - closed) <= 1e-9 * closed);
  }
}

TEST_CASE("tail_conditional examples") {
  for (const auto& g : tail_conditional(product3(5)).g) CHECK(g.cwiseAbs().maxCoeff() <= 1e-15);

  const auto tc = tail_conditional(fixtures::two_state(0.25, 3));
  REQUIRE(tc.g.size() == 3);
  CHECK((tc.g[0] - 0.75 * Eigen::Vector2d(-1, 1)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((tc.g[1] - 0.5 * Eigen::Vector2d(-1, 1)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(tc.g[2].isZero(0.0));

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ChainSpec spec = family_random(2 + seed % 3, seed, 0.0).make_row(2 + seed % 9);
    const auto laws = marginals(spec);
    const auto g = tail_conditional(spec).g;
    CHECK(g.back().isZero(0.0));
    for (std::size_t j = 0; j < spec.n; ++j) CHECK(std::fabs(laws.pi[j].dot(g[j])) <= 1e-10);
  }
}

TEST_CASE("A_moments examples") {
  const auto spec = fixtures::two_state(0.25, 3);
  const auto tc = tail_conditional(spec);
  CHECK(std::fabs(A_moments(spec, tc, 2.0) - 0.8125) <= 1e-15);
  CHECK(std::fabs(A_moments(spec, tc, 4.0) - 0.37890625) <= 1e-15);
  const auto p = product3(4);
  CHECK(A_moments(p, tail_conditional(p), 2.0) <= 1e-28);
  try {
    A_moments(spec, tc, 1.5);
    FAIL("expected InvalidOrder");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidOrder);
  }
}

TEST_CASE("martingale_check examples") {
  const auto r = martingale_check(fixtures::two_state(0.25, 3));
  REQUIRE(r.pathwise.has_value());
  CHECK(*r.pathwise <= 1e-10);
  CHECK(r.orthogonality <= 1e-10);
  CHECK(std::fabs(r.sum_Ed2 - 5.5) <= 1e-12);

  const auto p = product3(5);
  const auto rp = martingale_check(p);
  CHECK(std::fabs(rp.sum_Ed2 - b_squared(p)) <= 1e-12);
  CHECK(*rp.pathwise <= 1e-10);

  const auto big = martingale_check(fixtures::two_state(0.25, 30));
  CHECK_FALSE(big.pathwise.has_value());
  CHECK(big.orthogonality <= 1e-9 * 30.0);
}

TEST_CASE("variance bounds on two_state(0.25), n = 3") {
  const auto a = analyze(fixtures::two_state(0.25, 3));
  const auto checks = variance_bounds_check(a);
  const auto& lower = find(checks, "variance_lower");
  const auto& upper = find(checks, "variance_upper");
  CHECK(lower.passed());
  CHECK(upper.passed());
  CHECK(std::fabs(lower.lhs - 1.0) <= 1e-12);
  CHECK(std::fabs(upper.rhs - 9.0) <= 1e-12);
  CHECK(find(checks, "variance_lambda_form").passed());
}

TEST_CASE("variance bounds are tight on product chains") {
  const auto a = analyze(product3(7));
  for (const auto& c : variance_bounds_check(a)) {
    CHECK(c.passed());
    CHECK(std::fabs(c.margin) <= 1e-10);
  }
  for (const auto& c : delta_variance_bounds_check(a)) {
    CHECK(c.passed());
    CHECK(std::fabs(c.margin) <= 1e-10);
  }
}

TEST_CASE("variance bounds with rho1 = 1 skip the upper bound") {
  const auto a = analyze(fixtures::identity_chain(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(-1, 1), 4));
  const auto checks = variance_bounds_check(a);
  CHECK(find(checks, "variance_lower").passed());
  CHECK(find(checks, "variance_upper").status == CheckStatus::Skipped);
  for (const auto& c : delta_variance_bounds_check(a)) CHECK(c.status == CheckStatus::Skipped);
}

TEST_CASE("delta variance bounds on two_state(0.25), n = 3") {
  const auto checks = delta_variance_bounds_check(analyze(fixtures::two_state(0.25, 3)));
  const double factor = 0.5 / std::pow(1.0 + std::sqrt(0.5), 2);
  CHECK(std::fabs(factor - 0.171572875) <= 1e-9);
  const auto& lower = find(checks, "delta_variance_lower");
  const auto& upper = find(checks, "delta_variance_upper");
  CHECK(lower.passed());
  CHECK(upper.passed());
  CHECK(std::fabs(lower.lhs - 3.0 * factor) <= 1e-12);
  CHECK(std::fabs(upper.rhs - 3.0 / factor) <= 1e-9);
  CHECK(std::fabs(upper.rhs / 3.0 - 5.828427) <= 1e-6);
}

TEST_CASE("est1") {
  const auto c = est1_check(analyze(fixtures::two_state(0.25, 3)));
  CHECK(c.passed());
  CHECK(std::fabs(c.lhs - 2.4375) <= 1e-12);
  CHECK(std::fabs(c.rhs - 5.5) <= 1e-12);
  CHECK(est1_check(analyze(product3(4))).status == CheckStatus::Skipped);
}

TEST_CASE("ppower") {
  const auto a = analyze(fixtures::two_state(0.25, 3));
  const auto checks = lemma_ppower_check(a, 2.0);
  const auto& general = find(checks, "ppower_general[p=2]");
  const auto& geometric = find(checks, "ppower_geometric[p=2]");
  CHECK(general.passed());
  CHECK(std::fabs(general.lhs - 0.8125) <= 1e-12);
  CHECK(std::fabs(general.rhs - 1.6875) <= 1e-12);
  CHECK(geometric.passed());
  CHECK(std::fabs(geometric.rhs - 12.0) <= 1e-12);

  for (const auto& c : lemma_ppower_check(analyze(product3(4)), 4.0)) CHECK(c.passed());
  CHECK_THROWS_AS(lemma_ppower_check(a, 1.0), Error);
}

TEST_CASE("Lemma exp") {
  const auto spec = fixtures::two_state(0.25, 3);
  const auto a = analyze(spec);
  CHECK(std::fabs(exp_t_max(a) - 1.0 / 12.0) <= 1e-15);

  const auto checks = lemma_exp_check(a, {1.0 / 12.0});
  REQUIRE(checks.size() == 2);
  CHECK(checks[0].passed());
  CHECK(std::fabs(checks[0].lhs - std::exp(1.0 / 16.0)) <= 1e-12);
  CHECK(std::fabs(checks[0].lhs - 1.06449) <= 1e-5);
  const double rhs = std::pow(1.0 + 2.0 * (1.0 / 12.0) * std::sqrt(3.0) / 0.5, 2);
  CHECK(std::fabs(checks[0].rhs - rhs) <= 1e-12);
  CHECK(std::fabs(checks[0].rhs - 2.488) <= 1e-3);
  CHECK(checks[1].name == "exp_at_t_max");
  CHECK(checks[1].passed());
  CHECK(std::fabs(checks[1].rhs - std::pow(1.0 + std::sqrt(3.0) / 3.0, 2)) <= 1e-12);

  // Left side against the brute-force oracle: max_j |g_j| is 0.75 on every path.
  const double brute = fixtures::brute_expectation(spec, [](const std::vector<State>&) { return std::exp(0.75 / 12.0); });
  CHECK(std::fabs(checks[0].lhs - brute) <= 1e-12);

  try {
    lemma_exp_check(spec, 1.0);
    FAIL("expected InvalidT");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidT);
  }

  for (const auto& c : lemma_exp_check(analyze(product3(5)), {0.05, 0.1})) {
    CHECK(c.passed());
    if (c.name != "exp_at_t_max") CHECK(std::fabs(c.lhs - 1.0) <= 1e-12);
  }
}

TEST_CASE("moment_report on two_state(0.25), n = 3") {
  const auto r = moment_report(analyze(fixtures::two_state(0.25, 3)), {2.0, 4.0});
  CHECK(std::fabs(r.sigma2 - 5.5) <= 1e-12);
  CHECK(std::fabs(r.sigma2_oracle - 5.5) <= 1e-12);
  REQUIRE(r.sigma2_enumerated.has_value());
  CHECK(std::fabs(*r.sigma2_enumerated - 5.5) <= 1e-12);
  CHECK(std::fabs(r.EA_p.at(2.0) - 0.8125) <= 1e-15);
  CHECK(r.mart_residual <= 1e-10);
  for (const auto& c : r.bound_checks) {
    INFO(c.name);
    CHECK_FALSE(c.failed());
  }
}

TEST_CASE("sigma_squared matches independent oracles on 1000 random rows") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t m = 2 + seed % 3;
    const std::size_t n = 1 + (seed / 3) % 12;
    const ChainSpec spec = family_random(m, 5000 + seed, 0.0).make_row(n);
    const auto laws = marginals(spec);
    const double s2 = sigma_squared(spec, laws);
    const double scale = std::max(1.0, std::fabs(s2));
    INFO("seed " << seed << " m " << m << " n " << n);
    CHECK(s2 >= -1e-12);
    CHECK(b_squared(spec, laws) >= 0.0);
    CHECK(std::fabs(s2 - sigma_squared_covariance_sum(spec, laws)) <= 1e-9 * scale);
    CHECK(std::fabs(s2 - covariance_oracle(spec)) <= 1e-9 * scale);
    if (path_count(m, n) <= 100'000) CHECK(std::fabs(s2 - fixtures::brute_sum_squared(spec)) <= 1e-9 * scale);
    const auto mart = martingale_check(spec);
    CHECK(mart.orthogonality <= 1e-9 * scale);
    if (mart.pathwise) CHECK(*mart.pathwise <= 1e-10);
  }
}

TEST_CASE("all bound checks pass on random rows") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t m = 2 + seed % 4;
    const std::size_t n = 1 + (seed / 4) % 10;
    const ChainSpec spec = family_random(m, 9000 + seed, 0.0).make_row(n);
    const auto r = moment_report(analyze(spec), {2.0, 2.5, 3.0, 4.0});
    for (const auto& c : r.bound_checks) {
      INFO("seed " << seed << " " << c.name << " lhs " << c.lhs << " rhs " << c.rhs);
      CHECK_FALSE(c.failed());
    }
  }
}
