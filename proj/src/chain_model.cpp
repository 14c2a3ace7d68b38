#include "mixclt/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mixclt/error.hpp"
#include "mixclt/numeric.hpp"
#include "mixclt/tolerances.hpp"

namespace mixclt {

namespace {

void check_probability_vector(const Eigen::VectorXd& v, const std::string& what) {
  CompensatedSum total;
  for (Eigen::Index x = 0; x < v.size(); ++x) {
    if (!std::isfinite(v[x]) || v[x] < 0.0) {
      std::ostringstream os;
      os << what << " entry " << x << " = " << v[x];
      throw Error(ErrorKind::NotStochastic, os.str());
    }
    total += v[x];
  }
  if (std::fabs(total.value() - 1.0) > tol::kStochastic) {
    std::ostringstream os;
    os.precision(17);
    os << what << " sums to " << total.value();
    throw Error(ErrorKind::NotStochastic, os.str());
  }
}

double weighted_mean(const Eigen::VectorXd& pi, const Eigen::VectorXd& f) {
  CompensatedSum acc;
  for (Eigen::Index x = 0; x < pi.size(); ++x) acc += pi[x] * f[x];
  return acc.value();
}

}  // namespace

ChainSpec validate(const ChainSpec& spec, bool center) {
  const auto m = static_cast<Eigen::Index>(spec.m);
  if (spec.m < 1 || spec.n < 1) {
    throw Error(ErrorKind::DimensionMismatch, "m and n must be at least 1");
  }
  if (spec.initial.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "initial has length " +
                                                  std::to_string(spec.initial.size()) + ", expected " +
                                                  std::to_string(spec.m));
  }
  if (spec.transitions.size() != spec.n - 1) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(spec.n - 1) +
                                                  " transition matrices, got " +
                                                  std::to_string(spec.transitions.size()));
  }
  if (spec.f.size() != spec.n) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(spec.n) +
                                                  " observation functions, got " +
                                                  std::to_string(spec.f.size()));
  }
  for (std::size_t i = 0; i < spec.transitions.size(); ++i) {
    if (spec.transitions[i].rows() != m || spec.transitions[i].cols() != m) {
      throw Error(ErrorKind::DimensionMismatch, "transition " + std::to_string(i) + " is not m x m");
    }
  }
  for (std::size_t i = 0; i < spec.f.size(); ++i) {
    if (spec.f[i].size() != m) {
      throw Error(ErrorKind::DimensionMismatch, "f[" + std::to_string(i) + "] has wrong length");
    }
    if (!spec.f[i].allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "f[" + std::to_string(i) + "] is not finite");
    }
  }

  check_probability_vector(spec.initial, "initial");
  for (std::size_t i = 0; i < spec.transitions.size(); ++i) {
    for (Eigen::Index x = 0; x < m; ++x) {
      check_probability_vector(spec.transitions[i].row(x).transpose(),
                               "transition " + std::to_string(i) + " row " + std::to_string(x));
    }
  }

  ChainSpec out = spec;
  const MarginalLaws laws = marginals(spec);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double mean = weighted_mean(laws.pi[i], spec.f[i]);
    if (center) {
      const double scale = std::max(1.0, spec.f[i].cwiseAbs().maxCoeff());
      if (std::fabs(mean) > tol::kCenteringNoise * scale) {
        out.f[i] = (spec.f[i].array() - mean).matrix();
      }
    } else if (std::fabs(mean) > tol::kDerived) {
      std::ostringstream os;
      os.precision(17);
      os << "E f[" << i << "] = " << mean;
      throw Error(ErrorKind::NotCentered, os.str());
    }
  }
  return out;
}

MarginalLaws marginals(const ChainSpec& spec) {
  MarginalLaws laws;
  laws.pi.reserve(spec.n);
  laws.pi.push_back(spec.initial);
  for (std::size_t i = 0; i + 1 < spec.n; ++i) {
    laws.pi.push_back(spec.transitions[i].transpose() * laws.pi.back());
  }
  return laws;
}

JointLaw joint_law(const ChainSpec& spec, const MarginalLaws& laws, std::size_t s, std::size_t k) {
  if (k < 1 || s + k >= spec.n) {
    throw Error(ErrorKind::IndexOutOfRange,
                "joint_law(s=" + std::to_string(s) + ", k=" + std::to_string(k) +
                    ") needs k >= 1 and s + k < n = " + std::to_string(spec.n));
  }
  Eigen::MatrixXd product = spec.transitions[s];
  for (std::size_t i = s + 1; i < s + k; ++i) product = product * spec.transitions[i];
  return JointLaw{s, k, laws.pi[s].asDiagonal() * product};
}

JointLaw joint_law(const ChainSpec& spec, std::size_t s, std::size_t k) {
  return joint_law(spec, marginals(spec), s, k);
}

PathSampler::PathSampler(const ChainSpec& spec) : m_(spec.m), n_(spec.n) {
  cdf_.reserve(m_ + (n_ - 1) * m_ * m_);
  auto push_cdf = [this](const auto& row) {
    double running = 0.0;
    for (Eigen::Index y = 0; y < row.size(); ++y) {
      running += row[y];
      cdf_.push_back(running);
    }
  };
  push_cdf(spec.initial);
  for (const auto& q : spec.transitions) {
    for (Eigen::Index x = 0; x < q.rows(); ++x) push_cdf(q.row(x));
  }
  f_.reserve(n_ * m_);
  for (const auto& fi : spec.f) {
    for (Eigen::Index x = 0; x < fi.size(); ++x) f_.push_back(fi[x]);
  }
}

State PathSampler::draw(std::span<const double> cdf, double u) const noexcept {
  for (std::size_t y = 0; y < cdf.size(); ++y) {
    if (u < cdf[y]) return static_cast<State>(y);
  }
  // u fell above the rounded total mass: take the last state with positive mass.
  std::size_t y = cdf.size() - 1;
  while (y > 0 && cdf[y] == cdf[y - 1]) --y;
  return static_cast<State>(y);
}

void PathSampler::sample(PhiloxStream& stream, std::span<State> path) const {
  std::span<const double> all(cdf_);
  State x = draw(all.subspan(0, m_), stream.next_uniform());
  path[0] = x;
  for (std::size_t i = 1; i < n_; ++i) {
    const std::size_t offset = m_ + ((i - 1) * m_ + x) * m_;
    x = draw(all.subspan(offset, m_), stream.next_uniform());
    path[i] = x;
  }
}

double PathSampler::sample_sum(PhiloxStream& stream) const {
  std::span<const double> all(cdf_);
  State x = draw(all.subspan(0, m_), stream.next_uniform());
  double sum = f_[x];
  for (std::size_t i = 1; i < n_; ++i) {
    const std::size_t offset = m_ + ((i - 1) * m_ + x) * m_;
    x = draw(all.subspan(offset, m_), stream.next_uniform());
    sum += f_[i * m_ + x];
  }
  return sum;
}

std::vector<State> sample_path(const ChainSpec& spec, PhiloxStream& stream) {
  std::vector<State> path(spec.n);
  PathSampler(spec).sample(stream, path);
  return path;
}

std::uint64_t path_count(std::size_t m, std::size_t n) noexcept {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / m) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= m;
  }
  return count;
}

void for_each_path(const ChainSpec& spec, const PathVisitor& visit, std::uint64_t cap) {
  const std::uint64_t count = path_count(spec.m, spec.n);
  if (count > cap) {
    throw Error(ErrorKind::StateSpaceTooLarge, "m^n = " + std::to_string(count) +
                                                   " exceeds enumeration cap " + std::to_string(cap));
  }
  std::vector<State> path(spec.n);
  // prefix[i] = P(xi_0 = path[0], ..., xi_i = path[i]).
  std::vector<double> prefix(spec.n);

  // Depth-first in lexicographic order, pruning zero-mass prefixes.
  std::function<void(std::size_t)> descend = [&](std::size_t depth) {
    for (std::size_t y = 0; y < spec.m; ++y) {
      const double step = depth == 0 ? spec.initial[static_cast<Eigen::Index>(y)]
                                     : spec.transitions[depth - 1](path[depth - 1], static_cast<Eigen::Index>(y));
      if (step <= 0.0) continue;
      path[depth] = static_cast<State>(y);
      prefix[depth] = depth == 0 ? step : prefix[depth - 1] * step;
      if (depth + 1 == spec.n) {
        visit(path, prefix[depth]);
      } else {
        descend(depth + 1);
      }
    }
  };
  descend(0);
}

double enumerate_expectation(const ChainSpec& spec,
                             const std::function<double(std::span<const State>)>& functional,
                             std::uint64_t cap) {
  CompensatedSum acc;
  for_each_path(
      spec, [&](std::span<const State> path, double p) { acc += p * functional(path); }, cap);
  return acc.value();
}

double path_sum(const ChainSpec& spec, std::span<const State> path) {
  double s = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) s += spec.f[i][path[i]];
  return s;
}

}  // namespace mixclt
