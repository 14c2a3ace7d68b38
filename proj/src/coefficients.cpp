#include "mixclt/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixclt/error.hpp"
#include "mixclt/numeric.hpp"
#include "mixclt/tolerances.hpp"

namespace mixclt {

double max_correlation(const Eigen::MatrixXd& joint) {
  if (joint.size() == 0) throw Error(ErrorKind::DegenerateJoint, "empty joint matrix");
  CompensatedSum mass;
  for (Eigen::Index x = 0; x < joint.rows(); ++x) {
    for (Eigen::Index y = 0; y < joint.cols(); ++y) {
      const double v = joint(x, y);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::DegenerateJoint, "joint entry (" + std::to_string(x) + ", " +
                                                    std::to_string(y) + ") is negative or not finite");
      }
      mass += v;
    }
  }
  if (std::fabs(mass.value() - 1.0) > tol::kDerived) {
    throw Error(ErrorKind::DegenerateJoint, "joint mass is " + std::to_string(mass.value()));
  }

  const Eigen::VectorXd p = joint.rowwise().sum();
  const Eigen::VectorXd q = joint.colwise().sum().transpose();
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (p[x] > 0.0) rows.push_back(x);
  }
  for (Eigen::Index y = 0; y < q.size(); ++y) {
    if (q[y] > 0.0) cols.push_back(y);
  }
  // A single supported state on either side leaves no non-constant function.
  if (rows.size() < 2 || cols.size() < 2) return 0.0;

  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd centered(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double sp = std::sqrt(p[rows[static_cast<std::size_t>(i)]]);
    for (Eigen::Index j = 0; j < c; ++j) {
      const double sq = std::sqrt(q[cols[static_cast<std::size_t>(j)]]);
      centered(i, j) = joint(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]) / (sp * sq) -
                       sp * sq;
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const double value = svd.singularValues()(0);
  // Roundoff snap at both ends so that independence reads exactly 0 and
  // perfect coupling exactly 1.
  if (value >= 1.0 - tol::kAbsolute) return 1.0;
  if (value <= tol::kAbsolute) return 0.0;
  return value;
}

namespace {

// Updates best[k-1] with the lag-k coefficients starting at step s.
void rho_from_start(const ChainSpec& spec, const MarginalLaws& laws, std::size_t s,
                    std::vector<double>& best) {
  const auto m = static_cast<Eigen::Index>(spec.m);
  Eigen::MatrixXd product = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t k = 1; s + k < spec.n; ++k) {
    product = product * spec.transitions[s + k - 1];
    const Eigen::MatrixXd joint = laws.pi[s].asDiagonal() * product;
    best[k - 1] = std::max(best[k - 1], max_correlation(joint));
  }
}

}  // namespace

std::vector<double> rho_k_sequence_serial(const ChainSpec& spec) {
  if (spec.n < 2) return {};
  const MarginalLaws laws = marginals(spec);
  std::vector<double> best(spec.n - 1, 0.0);
  for (std::size_t s = 0; s + 1 < spec.n; ++s) rho_from_start(spec, laws, s, best);
  return best;
}

std::vector<double> rho_k_sequence(const ChainSpec& spec) {
  if (spec.n < 2) return {};
  const MarginalLaws laws = marginals(spec);
  const auto starts = static_cast<long>(spec.n - 1);
  std::vector<std::vector<double>> per_start(spec.n - 1);
#pragma omp parallel for schedule(dynamic)
  for (long s = 0; s < starts; ++s) {
    std::vector<double> local(spec.n - 1, 0.0);
    rho_from_start(spec, laws, static_cast<std::size_t>(s), local);
    per_start[static_cast<std::size_t>(s)] = std::move(local);
  }
  // max is exact, so combining in index order gives the serial result bitwise.
  std::vector<double> best(spec.n - 1, 0.0);
  for (const auto& local : per_start) {
    for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], local[k]);
  }
  return best;
}

Rho1Lambda rho1_lambda(const ChainSpec& spec, const MarginalLaws& laws) {
  Rho1Lambda out;
  for (std::size_t s = 0; s + 1 < spec.n; ++s) {
    const Eigen::MatrixXd joint = laws.pi[s].asDiagonal() * spec.transitions[s];
    out.rho1 = std::max(out.rho1, max_correlation(joint));
  }
  out.lambda = 1.0 - out.rho1;
  return out;
}

Rho1Lambda rho1_lambda(const ChainSpec& spec) { return rho1_lambda(spec, marginals(spec)); }

double delta_coefficient(const Eigen::MatrixXd& q) {
  double best = 0.0;
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < q.rows(); ++b) {
      best = std::max(best, 0.5 * (q.row(a) - q.row(b)).cwiseAbs().sum());
    }
  }
  return std::clamp(best, 0.0, 1.0);
}

std::vector<double> delta_steps(const ChainSpec& spec) {
  std::vector<double> out;
  out.reserve(spec.transitions.size());
  for (const auto& q : spec.transitions) out.push_back(delta_coefficient(q));
  return out;
}

double delta1(const ChainSpec& spec) {
  const auto steps = delta_steps(spec);
  return steps.empty() ? 0.0 : *std::max_element(steps.begin(), steps.end());
}

bool geometric_domination(const std::vector<double>& rho_k, double rho, double slack) {
  for (std::size_t k = 1; k <= rho_k.size(); ++k) {
    if (rho_k[k - 1] > std::pow(rho, static_cast<double>(k)) + slack) return false;
  }
  return true;
}

CoefficientReport coefficient_report(const ChainSpec& spec) {
  CoefficientReport report;
  report.m = spec.m;
  report.n = spec.n;
  report.rho_k = rho_k_sequence(spec);
  // rho1 is the lag-1 entry; both routes maximize the same joints.
  report.rho1 = report.rho_k.empty() ? 0.0 : report.rho_k.front();
  report.lambda = 1.0 - report.rho1;
  report.delta_steps = delta_steps(spec);
  report.delta1 = report.delta_steps.empty()
                      ? 0.0
                      : *std::max_element(report.delta_steps.begin(), report.delta_steps.end());

  for (std::size_t k = 1; k <= report.rho_k.size(); ++k) {
    report.checks.push_back(check_le("rho_k<=rho1^k[k=" + std::to_string(k) + "]", report.rho_k[k - 1],
                                     std::pow(report.rho1, static_cast<double>(k)), tol::kCoefficient));
  }
  report.checks.push_back(
      check_le("rho1<=sqrt(delta1)", report.rho1, std::sqrt(report.delta1), tol::kCoefficient));
  return report;
}

}  // namespace mixclt
