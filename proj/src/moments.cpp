#include "mixclt/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixclt/error.hpp"
#include "mixclt/numeric.hpp"
#include "mixclt/tolerances.hpp"

namespace mixclt {

namespace {

double dot_compensated(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  CompensatedSum acc;
  for (Eigen::Index x = 0; x < a.size(); ++x) acc += a[x] * b[x];
  return acc.value();
}

std::string fmt_p(double p) {
  std::string s = std::to_string(p);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Numbers this close to zero are roundoff, not dependence.
constexpr double kRhoZero = 1e-12;

}  // namespace

double b_squared(const ChainSpec& spec, const MarginalLaws& laws) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < spec.n; ++i) acc += dot_compensated(laws.pi[i], spec.f[i].cwiseAbs2());
  return acc.value();
}

double b_squared(const ChainSpec& spec) { return b_squared(spec, marginals(spec)); }

double sigma_squared(const ChainSpec& spec, const MarginalLaws& laws) {
  CompensatedSum total;
  Eigen::VectorXd h = spec.f[0].cwiseProduct(laws.pi[0]);
  total += dot_compensated(laws.pi[0], spec.f[0].cwiseAbs2());
  for (std::size_t j = 1; j < spec.n; ++j) {
    // carried(y) = E(S_{j-1} 1{xi_j = y})
    const Eigen::VectorXd carried = spec.transitions[j - 1].transpose() * h;
    total += dot_compensated(laws.pi[j], spec.f[j].cwiseAbs2());
    total += 2.0 * dot_compensated(spec.f[j], carried);
    h = carried + spec.f[j].cwiseProduct(laws.pi[j]);
  }
  return total.value();
}

double sigma_squared(const ChainSpec& spec) { return sigma_squared(spec, marginals(spec)); }

double sigma_squared_covariance_sum(const ChainSpec& spec, const MarginalLaws& laws) {
  CompensatedSum total;
  for (std::size_t i = 0; i < spec.n; ++i) {
    Eigen::VectorXd w = laws.pi[i].cwiseProduct(spec.f[i]);
    total += dot_compensated(w, spec.f[i]);
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      w = spec.transitions[j - 1].transpose() * w;
      total += 2.0 * dot_compensated(w, spec.f[j]);
    }
  }
  return total.value();
}

double sigma_squared_covariance_sum(const ChainSpec& spec) {
  return sigma_squared_covariance_sum(spec, marginals(spec));
}

TailConditional tail_conditional(const ChainSpec& spec) {
  TailConditional tc;
  tc.g.assign(spec.n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.m)));
  for (std::size_t j = spec.n - 1; j-- > 0;) {
    tc.g[j] = spec.transitions[j] * (spec.f[j + 1] + tc.g[j + 1]);
  }
  return tc;
}

double A_moments(const MarginalLaws& laws, const TailConditional& tc, double p) {
  if (!(p >= 2.0)) throw Error(ErrorKind::InvalidOrder, "p = " + std::to_string(p) + " < 2");
  CompensatedSum acc;
  for (std::size_t j = 0; j < tc.g.size(); ++j) {
    for (Eigen::Index x = 0; x < tc.g[j].size(); ++x) {
      acc += laws.pi[j][x] * std::pow(std::fabs(tc.g[j][x]), p);
    }
  }
  return acc.value();
}

double A_moments(const ChainSpec& spec, const TailConditional& tc, double p) {
  return A_moments(marginals(spec), tc, p);
}

double X_moments(const ChainSpec& spec, const MarginalLaws& laws, double p) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (Eigen::Index x = 0; x < spec.f[i].size(); ++x) {
      acc += laws.pi[i][x] * std::pow(std::fabs(spec.f[i][x]), p);
    }
  }
  return acc.value();
}

double essential_bound(const ChainSpec& spec, const MarginalLaws& laws) {
  double c = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (Eigen::Index x = 0; x < spec.f[i].size(); ++x) {
      if (laws.pi[i][x] > 0.0) c = std::max(c, std::fabs(spec.f[i][x]));
    }
  }
  return c;
}

MartingaleResiduals martingale_check(const ChainSpec& spec, std::uint64_t cap) {
  const MarginalLaws laws = marginals(spec);
  const TailConditional tc = tail_conditional(spec);
  MartingaleResiduals out;

  if (path_count(spec.m, spec.n) <= cap) {
    double worst = 0.0;
    for_each_path(
        spec,
        [&](std::span<const State> path, double) {
          double telescoped = 0.0;
          for (std::size_t j = 0; j < spec.n; ++j) {
            const double previous = j == 0 ? 0.0 : tc.g[j - 1][path[j - 1]];
            telescoped += spec.f[j][path[j]] + tc.g[j][path[j]] - previous;
          }
          worst = std::max(worst, std::fabs(telescoped - path_sum(spec, path)));
        },
        cap);
    out.pathwise = worst;
  }

  // d_j depends on (xi_{j-1}, xi_j) only, so E d_j^2 needs the adjacent joint.
  CompensatedSum total;
  out.Ed2.reserve(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    CompensatedSum ed2;
    const Eigen::VectorXd head = spec.f[j] + tc.g[j];
    if (j == 0) {
      for (Eigen::Index y = 0; y < head.size(); ++y) ed2 += laws.pi[0][y] * head[y] * head[y];
    } else {
      const Eigen::MatrixXd& q = spec.transitions[j - 1];
      for (Eigen::Index x = 0; x < q.rows(); ++x) {
        if (laws.pi[j - 1][x] == 0.0) continue;
        for (Eigen::Index y = 0; y < q.cols(); ++y) {
          const double d = head[y] - tc.g[j - 1][x];
          ed2 += laws.pi[j - 1][x] * q(x, y) * d * d;
        }
      }
    }
    out.Ed2.push_back(ed2.value());
    total += ed2.value();
  }
  out.sum_Ed2 = total.value();
  out.orthogonality = std::fabs(out.sum_Ed2 - sigma_squared(spec, laws));
  return out;
}

ChainAnalysis analyze(const ChainSpec& spec) {
  ChainAnalysis a;
  a.spec = spec;
  a.laws = marginals(spec);
  a.coefficients = coefficient_report(spec);
  a.tail = tail_conditional(spec);
  a.b2 = b_squared(spec, a.laws);
  a.sigma2 = sigma_squared(spec, a.laws);
  a.C = essential_bound(spec, a.laws);
  return a;
}

std::vector<CheckOutcome> variance_bounds_check(const ChainAnalysis& a, double rel) {
  const double rho = a.coefficients.rho1;
  const double lambda = a.coefficients.lambda;
  const double slack = rel * a.b2 + tol::kAbsolute;
  std::vector<CheckOutcome> out;

  const double lower_factor = (1.0 - rho) / (1.0 + rho);
  out.push_back(check_le("variance_lower", lower_factor * a.b2, a.sigma2, slack));

  if (rho < 1.0) {
    const double upper_factor = (1.0 + rho) / (1.0 - rho);
    out.push_back(check_le("variance_upper", a.sigma2, upper_factor * a.b2, slack));
  } else {
    out.push_back(skipped("variance_upper", "DegenerateMixing: rho1 = 1, upper bound vacuous"));
  }

  const double lambda_factor = lambda / (2.0 - lambda);
  auto agree = check_le("variance_lambda_form", std::fabs(lower_factor - lambda_factor), 0.0, tol::kAbsolute);
  agree.note = "(1-rho)/(1+rho) vs lambda/(2-lambda)";
  out.push_back(agree);
  return out;
}

std::vector<CheckOutcome> delta_variance_bounds_check(const ChainAnalysis& a, double rel) {
  const double delta = a.coefficients.delta1;
  if (!(delta < 1.0)) {
    return {skipped("delta_variance_lower", "DegenerateContraction: delta1 = 1"),
            skipped("delta_variance_upper", "DegenerateContraction: delta1 = 1")};
  }
  const double root = std::sqrt(delta);
  const double factor = (1.0 - delta) / ((1.0 + root) * (1.0 + root));
  const double slack = rel * a.b2 + tol::kAbsolute;
  return {check_le("delta_variance_lower", factor * a.b2, a.sigma2, slack),
          check_le("delta_variance_upper", a.sigma2, a.b2 / factor, slack)};
}

CheckOutcome est1_check(const ChainAnalysis& a, double rel) {
  const double rho = a.coefficients.rho1;
  if (rho <= kRhoZero) return skipped("est1", "rho1 = 0: all A_j vanish");
  if (rho >= 1.0) return skipped("est1", "DegenerateMixing: rho1 = 1");
  const double sum_A2 = A_moments(a.laws, a.tail, 2.0);
  const double rhs = (1.0 - rho * rho) / (rho * rho) * sum_A2;
  // sigma^2 >= rhs, written as rhs <= sigma^2.
  return check_le("est1", rhs, a.sigma2, rel * a.sigma2 + tol::kAbsolute);
}

std::vector<CheckOutcome> lemma_ppower_check(const ChainAnalysis& a, double p, double rel) {
  if (!(p >= 2.0)) throw Error(ErrorKind::InvalidOrder, "p = " + std::to_string(p) + " < 2");
  const std::string tag = "[p=" + fmt_p(p) + "]";
  const double lhs = A_moments(a.laws, a.tail, p);
  const double x_moment = X_moments(a.spec, a.laws, p);

  std::vector<CheckOutcome> out;
  // Inner sum over k = 1..n-1, dominating every per-j range 1..n-j.
  CompensatedSum inner;
  for (double r : a.coefficients.rho_k) inner += std::pow(r, 2.0 / p);
  const double first = std::pow(2.0, p - 2.0) * std::pow(inner.value(), p) * x_moment;
  out.push_back(check_le("ppower_general" + tag, lhs, first, rel * first + tol::kAbsolute));

  const double rho = a.coefficients.rho1;
  if (!(rho < 1.0)) {
    out.push_back(skipped("ppower_geometric" + tag, "DegenerateMixing: rho1 = 1"));
  } else if (!geometric_domination(a.coefficients.rho_k, rho, tol::kCoefficient)) {
    auto c = skipped("ppower_geometric" + tag, "rho_k <= rho1^k does not hold; geometric form aborted");
    c.status = CheckStatus::Fail;
    out.push_back(c);
  } else {
    const double second = std::pow(p, p) / (4.0 * std::pow(1.0 - rho, p)) * x_moment;
    out.push_back(check_le("ppower_geometric" + tag, lhs, second, rel * second + tol::kAbsolute));
  }
  return out;
}

double exp_t_max(const ChainAnalysis& a) {
  if (a.C <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - a.coefficients.rho1) / (6.0 * a.C);
}

std::vector<double> exp_moment_of_max_tail(const ChainAnalysis& a, const std::vector<double>& ts,
                                           std::uint64_t cap) {
  std::vector<CompensatedSum> acc(ts.size());
  for_each_path(
      a.spec,
      [&](std::span<const State> path, double prob) {
        double worst = 0.0;
        for (std::size_t j = 0; j < path.size(); ++j) worst = std::max(worst, std::fabs(a.tail.g[j][path[j]]));
        for (std::size_t i = 0; i < ts.size(); ++i) acc[i] += prob * std::exp(ts[i] * worst);
      },
      cap);
  std::vector<double> out;
  out.reserve(ts.size());
  for (const auto& s : acc) out.push_back(s.value());
  return out;
}

std::vector<double> default_exp_grid(const ChainAnalysis& a) {
  const double t_max = exp_t_max(a);
  if (!std::isfinite(t_max)) return {0.1, 0.25, 0.5, 0.75, 1.0};
  return {0.1 * t_max, 0.25 * t_max, 0.5 * t_max, 0.75 * t_max, t_max};
}

std::vector<CheckOutcome> lemma_exp_check(const ChainAnalysis& a, const std::vector<double>& ts, double rel,
                                          std::uint64_t cap) {
  const double rho = a.coefficients.rho1;
  const double t_max = exp_t_max(a);
  for (double t : ts) {
    if (t > t_max * (1.0 + 1e-12)) {
      throw Error(ErrorKind::InvalidT,
                  "t = " + std::to_string(t) + " exceeds (1 - rho1)/(6C) = " + std::to_string(t_max));
    }
  }
  if (!(rho < 1.0)) return {skipped("exp", "DegenerateMixing: rho1 = 1, no admissible t > 0")};
  if (!geometric_domination(a.coefficients.rho_k, rho, tol::kCoefficient)) {
    auto c = skipped("exp", "rho_k <= rho1^k does not hold; aborted");
    c.status = CheckStatus::Fail;
    return {c};
  }

  const bool bounded = std::isfinite(t_max);
  std::vector<double> all_ts = ts;
  if (bounded) all_ts.push_back(t_max);
  const std::vector<double> lhs = exp_moment_of_max_tail(a, all_ts, cap);
  const double b = std::sqrt(a.b2);

  std::vector<CheckOutcome> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double base = 1.0 + 2.0 * ts[i] * b / (1.0 - rho);
    const double rhs = base * base;
    auto c = check_le("exp[t=" + std::to_string(ts[i]) + "]", lhs[i], rhs, rel * rhs);
    out.push_back(c);
  }
  if (bounded) {
    const double base = 1.0 + b / (3.0 * a.C);
    const double rhs = base * base;
    out.push_back(check_le("exp_at_t_max", lhs.back(), rhs, rel * rhs));
  }
  return out;
}

std::vector<CheckOutcome> lemma_exp_check(const ChainSpec& spec, double t) {
  return lemma_exp_check(analyze(spec), std::vector<double>{t});
}

MomentReport moment_report(const ChainAnalysis& a, const std::vector<double>& p_orders, double rel) {
  MomentReport r;
  r.b2 = a.b2;
  r.sigma2 = a.sigma2;
  r.sigma2_oracle = sigma_squared_covariance_sum(a.spec, a.laws);
  if (path_count(a.spec.m, a.spec.n) <= 100'000) {
    r.sigma2_enumerated = enumerate_expectation(a.spec, [&](std::span<const State> path) {
      const double s = path_sum(a.spec, path);
      return s * s;
    });
  }
  for (double p : p_orders) r.EA_p[p] = A_moments(a.laws, a.tail, p);

  const MartingaleResiduals mart = martingale_check(a.spec);
  r.mart_residual = mart.orthogonality;
  r.pathwise_residual = mart.pathwise;

  auto append = [&](std::vector<CheckOutcome> cs) {
    for (auto& c : cs) r.bound_checks.push_back(std::move(c));
  };
  append(variance_bounds_check(a, rel));
  append(delta_variance_bounds_check(a, rel));
  r.bound_checks.push_back(est1_check(a, rel));
  for (double p : p_orders) append(lemma_ppower_check(a, p, rel));
  if (path_count(a.spec.m, a.spec.n) <= kEnumerationCap) {
    append(lemma_exp_check(a, default_exp_grid(a), rel));
  } else {
    r.bound_checks.push_back(skipped("exp", "StateSpaceTooLarge: m^n exceeds the enumeration cap"));
  }
  return r;
}

}  // namespace mixclt
