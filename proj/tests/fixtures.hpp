#pragma once

// Hand-built rows and test-only oracles. Nothing here calls the routines it
// is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mixclt/chain_model.hpp"

namespace fixtures {

inline mixclt::ChainSpec homogeneous(const Eigen::VectorXd& initial, const Eigen::MatrixXd& q,
                                     const Eigen::VectorXd& f, std::size_t n) {
  mixclt::ChainSpec spec;
  spec.m = static_cast<std::size_t>(initial.size());
  spec.n = n;
  spec.initial = initial;
  spec.transitions.assign(n - 1, q);
  spec.f.assign(n, f);
  return spec;
}

inline Eigen::MatrixXd flip_matrix(double a) {
  Eigen::MatrixXd q(2, 2);
  q << 1.0 - a, a, a, 1.0 - a;
  return q;
}

/// Symmetric two-state chain, uniform start, f = (-1, +1).
inline mixclt::ChainSpec two_state(double a, std::size_t n) {
  return homogeneous(Eigen::Vector2d(0.5, 0.5), flip_matrix(a), Eigen::Vector2d(-1.0, 1.0), n);
}

/// Every transition row equals `row`; initial equals `row` too.
inline mixclt::ChainSpec product_chain(const Eigen::VectorXd& row, const Eigen::VectorXd& f, std::size_t n) {
  return homogeneous(row, row.transpose().replicate(row.size(), 1), f, n);
}

inline mixclt::ChainSpec identity_chain(const Eigen::VectorXd& initial, const Eigen::VectorXd& f, std::size_t n) {
  return homogeneous(initial, Eigen::MatrixXd::Identity(initial.size(), initial.size()), f, n);
}

/// Brute-force E[functional] over all m^n paths, plain recursion, no pruning.
inline double brute_expectation(const mixclt::ChainSpec& spec,
                                const std::function<double(const std::vector<mixclt::State>&)>& functional) {
  std::vector<mixclt::State> path(spec.n);
  long double total = 0.0L;
  std::function<void(std::size_t, long double)> rec = [&](std::size_t depth, long double prob) {
    if (depth == spec.n) {
      total += prob * functional(path);
      return;
    }
    for (std::size_t y = 0; y < spec.m; ++y) {
      const double step = depth == 0 ? spec.initial[static_cast<Eigen::Index>(y)]
                                     : spec.transitions[depth - 1](path[depth - 1], static_cast<Eigen::Index>(y));
      path[depth] = static_cast<mixclt::State>(y);
      rec(depth + 1, prob * step);
    }
  };
  rec(0, 1.0L);
  return static_cast<double>(total);
}

inline double brute_sum_squared(const mixclt::ChainSpec& spec) {
  return brute_expectation(spec, [&](const std::vector<mixclt::State>& path) {
    double s = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) s += spec.f[i][path[i]];
    return s * s;
  });
}

/// |corr(f(U), g(V))| maximised over a grid of direction pairs (f, g) =
/// ((cos a, sin a), (cos b, sin b)) for a two-state joint. Constant pairs are
/// skipped.
inline double grid_max_correlation_2x2(const Eigen::Matrix2d& joint, int steps = 100) {
  const Eigen::Vector2d p = joint.rowwise().sum();
  const Eigen::Vector2d q = joint.colwise().sum().transpose();
  double best = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double a = M_PI * (i + 0.5) / steps;
    const Eigen::Vector2d f(std::cos(a), std::sin(a));
    for (int j = 0; j < steps; ++j) {
      const double b = M_PI * (j + 0.5) / steps;
      const Eigen::Vector2d g(std::cos(b), std::sin(b));
      const double mf = p.dot(f);
      const double mg = q.dot(g);
      const double vf = p.dot(f.cwiseAbs2()) - mf * mf;
      const double vg = q.dot(g.cwiseAbs2()) - mg * mg;
      if (vf <= 1e-14 || vg <= 1e-14) continue;
      const double cov = f.dot(joint * g) - mf * mg;
      best = std::max(best, std::fabs(cov) / std::sqrt(vf * vg));
    }
  }
  return best;
}

/// Standard normal quantile by bisection on 0.5 erfc(-x/sqrt 2).
inline double normal_quantile(double u) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fixtures
