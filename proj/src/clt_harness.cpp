#include "mixclt/clt_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixclt/coefficients.hpp"
#include "mixclt/error.hpp"
#include "mixclt/moments.hpp"
#include "mixclt/numeric.hpp"

namespace mixclt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoZero = 1e-12;

void require_mixing(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::DegenerateMixing, "lambda = 0 (rho1 = 1)");
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw Error(ErrorKind::ZeroVariance, std::string(what) + " = 0");
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// E Z^2 1{|Z| > u} for Z ~ N(0,1), u >= 0.
double gaussian_second_tail(double u) { return 2.0 * (u * normal_pdf(u) + 1.0 - normal_cdf(u)); }

// E f(Z)^2 1{|f(Z)| > u} for the catalog observation f.
double gaussian_observation_tail(const GaussianObservation& f, double u) {
  u = std::max(u, 0.0);
  if (f.kind == GaussianObservation::Kind::Identity) return gaussian_second_tail(u);
  const double c = f.clip;
  if (u >= c) return 0.0;
  return gaussian_second_tail(u) - gaussian_second_tail(c) + 2.0 * c * c * (1.0 - normal_cdf(c));
}

double truncated_second_moment(const ChainSpec& spec, const MarginalLaws& laws, double threshold) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (Eigen::Index x = 0; x < spec.f[i].size(); ++x) {
      const double v = spec.f[i][x];
      if (std::fabs(v) > threshold) acc += laws.pi[i][x] * v * v;
    }
  }
  return acc.value();
}

}  // namespace

RowQuantities row_quantities(const ChainSpec& spec) {
  const MarginalLaws laws = marginals(spec);
  RowQuantities q;
  q.n = spec.n;
  q.C = essential_bound(spec, laws);
  q.rho1 = rho1_lambda(spec, laws).rho1;
  if (q.rho1 <= kRhoZero) q.rho1 = 0.0;
  q.lambda = 1.0 - q.rho1;
  q.delta1 = delta1(spec);
  q.sigma = std::sqrt(std::max(0.0, sigma_squared(spec, laws)));
  q.b = std::sqrt(b_squared(spec, laws));
  return q;
}

RowQuantities row_quantities(const GaussianAr1& model, std::size_t n) {
  RowQuantities q;
  q.n = n;
  q.C = model.observation().kind == GaussianObservation::Kind::Identity ? kInf : model.observation().clip;
  q.rho1 = n >= 2 ? std::fabs(model.phi()) : 0.0;
  if (q.rho1 <= kRhoZero) q.rho1 = 0.0;
  q.lambda = 1.0 - q.rho1;
  q.delta1 = n >= 2 ? 1.0 : 0.0;
  q.sigma = std::sqrt(model.sigma2(n));
  q.b = std::sqrt(static_cast<double>(n) * model.stationary_variance());
  return q;
}

ConditionValue condition_dob(const RowQuantities& q) {
  require_mixing(q.lambda);
  require_positive(q.sigma, "sigma_n");
  if (q.lambda >= 1.0) return {0.0, kFlagIndependent};
  if (!std::isfinite(q.C)) return {kInf, kFlagUnbounded};
  return {q.C * std::fabs(std::log(q.lambda)) / (q.lambda * q.sigma), ""};
}

ConditionValue condition_dob(const ChainSpec& spec) { return condition_dob(row_quantities(spec)); }

ConditionValue condition_log2(const RowQuantities& q) {
  require_mixing(q.lambda);
  if (q.lambda >= 1.0) return {kInf, kFlagIndependent};
  const double log_lambda = std::log(q.lambda);
  return {q.lambda * q.lambda * q.lambda * static_cast<double>(q.n) / (log_lambda * log_lambda), ""};
}

ConditionValue condition_log2(const ChainSpec& spec) { return condition_log2(row_quantities(spec)); }

ConditionValue condition_dobrushin_cd(const RowQuantities& q) {
  require_positive(q.b, "b_n");
  const double alpha = q.alpha();
  if (!(alpha > 0.0)) return {kInf, kFlagContraction};
  if (!std::isfinite(q.C)) return {kInf, kFlagUnbounded};
  return {q.C * q.C / (alpha * alpha * alpha * q.b * q.b), ""};
}

ConditionValue condition_dobrushin_cd(const ChainSpec& spec) {
  return condition_dobrushin_cd(row_quantities(spec));
}

double h_weight(double lambda) { return lambda / std::fabs(std::log(lambda)); }

double h_prime_weight(double lambda) { return std::pow(lambda, 1.5) / std::fabs(std::log(lambda)); }

ConditionValue lindeberg_functional(const ChainSpec& spec, double eps) {
  const RowQuantities q = row_quantities(spec);
  require_mixing(q.lambda);
  require_positive(q.sigma, "sigma_n");
  // h(1) is undefined; the indicator is taken empty.
  if (q.lambda >= 1.0) return {0.0, kFlagIndependent};
  const double threshold = eps * h_weight(q.lambda) * q.sigma;
  const double tail = truncated_second_moment(spec, marginals(spec), threshold);
  return {tail / (q.lambda * q.sigma * q.sigma), ""};
}

ConditionValue lindeberg_b_functional(const ChainSpec& spec, double eps) {
  const RowQuantities q = row_quantities(spec);
  require_mixing(q.lambda);
  require_positive(q.b, "b_n");
  if (q.lambda >= 1.0) return {0.0, kFlagIndependent};
  const double threshold = eps * h_prime_weight(q.lambda) * q.b;
  const double tail = truncated_second_moment(spec, marginals(spec), threshold);
  return {tail / (q.lambda * q.lambda * q.b * q.b), ""};
}

ConditionValue lindeberg_functional(const GaussianAr1& model, std::size_t n, double eps) {
  const RowQuantities q = row_quantities(model, n);
  require_mixing(q.lambda);
  require_positive(q.sigma, "sigma_n");
  if (q.lambda >= 1.0) return {0.0, kFlagIndependent};
  const double threshold = eps * h_weight(q.lambda) * q.sigma;
  const double tail = static_cast<double>(n) * gaussian_observation_tail(model.observation(), threshold);
  return {tail / (q.lambda * q.sigma * q.sigma), ""};
}

ConditionValue lindeberg_b_functional(const GaussianAr1& model, std::size_t n, double eps) {
  const RowQuantities q = row_quantities(model, n);
  require_mixing(q.lambda);
  require_positive(q.b, "b_n");
  if (q.lambda >= 1.0) return {0.0, kFlagIndependent};
  const double threshold = eps * h_prime_weight(q.lambda) * q.b;
  const double tail = static_cast<double>(n) * gaussian_observation_tail(model.observation(), threshold);
  return {tail / (q.lambda * q.lambda * q.b * q.b), ""};
}

TruncatedPair truncate(const ChainSpec& spec, double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "truncation level must be positive");
  const MarginalLaws laws = marginals(spec);
  TruncatedPair out{spec, spec};
  for (std::size_t i = 0; i < spec.n; ++i) {
    Eigen::VectorXd kept = spec.f[i];
    for (Eigen::Index x = 0; x < kept.size(); ++x) {
      if (std::fabs(kept[x]) > T) kept[x] = 0.0;
    }
    CompensatedSum mean;
    for (Eigen::Index x = 0; x < kept.size(); ++x) mean += laws.pi[i][x] * kept[x];
    out.truncated.f[i] = (kept.array() - mean.value()).matrix();
    out.tail.f[i] = spec.f[i] - out.truncated.f[i];
  }
  out.truncated.name = spec.name.empty() ? "" : spec.name + " (truncated)";
  out.tail.name = spec.name.empty() ? "" : spec.name + " (tail)";
  return out;
}

SampleMoments sample_moments(const std::vector<double>& sample) {
  if (sample.empty()) throw Error(ErrorKind::EmptySample, "sample moments of an empty sample");
  SampleMoments out;
  CompensatedSum sum;
  for (double v : sample) sum += v;
  const double k = static_cast<double>(sample.size());
  out.mean = sum.value() / k;
  CompensatedSum m2;
  CompensatedSum m4;
  for (double v : sample) {
    const double d = v - out.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  out.variance = sample.size() > 1 ? m2.value() / (k - 1.0) : 0.0;
  const double pop_var = m2.value() / k;
  out.excess_kurtosis = pop_var > 0.0 ? (m4.value() / k) / (pop_var * pop_var) - 3.0 : 0.0;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance(std::vector<double> sample) {
  if (sample.empty()) throw Error(ErrorKind::EmptySample, "KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double k = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double phi = normal_cdf(sample[i]);
    const double above = static_cast<double>(i + 1) / k - phi;
    const double below = phi - static_cast<double>(i) / k;
    worst = std::max({worst, above, below});
  }
  return worst;
}

namespace {

struct Normalizer {
  const PathSampler* sampler = nullptr;
  const GaussianAr1* gaussian = nullptr;
  std::size_t n = 0;
  double sigma = 0.0;

  double replicate(std::uint64_t seed, std::size_t r) const {
    PhiloxStream stream(seed, static_cast<std::uint64_t>(r));
    const double s = sampler ? sampler->sample_sum(stream) : gaussian->sample_sum(stream, n);
    return s / sigma;
  }
};

template <typename Fill>
NormalizedSums normalized_sums(const TriangularFamily& family, std::size_t n, std::size_t replicates,
                               Fill&& fill) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "row length must be at least 1");
  NormalizedSums out;
  out.values.assign(replicates, 0.0);
  if (family.finite()) {
    const ChainSpec spec = validate(family.make_row(n), false);
    const PathSampler sampler(spec);
    out.sigma = std::sqrt(std::max(0.0, sigma_squared(spec)));
    out.normalization = "exact";
    require_positive(out.sigma, "sigma_n");
    fill(Normalizer{&sampler, nullptr, n, out.sigma}, out.values);
  } else {
    const GaussianAr1& model = *family.gaussian;
    out.sigma = std::sqrt(model.sigma2(n));
    out.normalization = "analytic";
    require_positive(out.sigma, "sigma_n");
    fill(Normalizer{nullptr, &model, n, out.sigma}, out.values);
  }
  return out;
}

}  // namespace

NormalizedSums mc_normalized_sums(const TriangularFamily& family, std::size_t n, std::size_t replicates,
                                  std::uint64_t seed) {
  return normalized_sums(family, n, replicates, [seed](const Normalizer& norm, std::vector<double>& values) {
    const auto count = static_cast<long long>(values.size());
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < count; ++r) {
      values[static_cast<std::size_t>(r)] = norm.replicate(seed, static_cast<std::size_t>(r));
    }
  });
}

NormalizedSums mc_normalized_sums_serial(const TriangularFamily& family, std::size_t n, std::size_t replicates,
                                         std::uint64_t seed) {
  return normalized_sums(family, n, replicates, [seed](const Normalizer& norm, std::vector<double>& values) {
    for (std::size_t r = 0; r < values.size(); ++r) values[r] = norm.replicate(seed, r);
  });
}

std::string classify_trend(const std::vector<double>& values) {
  if (values.empty()) return "degenerate";
  for (double v : values) {
    if (!std::isfinite(v)) return "degenerate";
  }
  if (values.size() < 2) return "bounded";
  bool decreasing = true;
  bool increasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] >= values[i - 1]) decreasing = false;
    if (values[i] <= values[i - 1]) increasing = false;
  }
  if (decreasing && values.back() < 0.5 * values.front()) return "to_zero";
  if (increasing && values.back() > 2.0 * values.front()) return "to_infinity";
  return "bounded";
}

ExperimentResult run_experiment(const TriangularFamily& family, const std::vector<std::size_t>& n_grid,
                                std::size_t replicates, std::uint64_t seed, const std::vector<double>& eps) {
  if (replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be at least 1");
  if (n_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw Error(ErrorKind::InvalidArgument, "n grid must be strictly increasing");
  }

  ExperimentResult result;
  result.family = family.descriptor;
  result.n_grid = n_grid;
  result.replicates = replicates;
  result.seed = seed;
  result.eps = eps;

  for (std::size_t n : n_grid) {
    ExperimentRow row;
    row.n = n;
    row.replicates = replicates;
    row.seed = seed;
    try {
      auto guarded = [](auto&& evaluate) -> ConditionValue {
        try {
          return evaluate();
        } catch (const Error& e) {
          return {std::numeric_limits<double>::quiet_NaN(), to_string(e.kind())};
        }
      };
      if (family.finite()) {
        const ChainSpec spec = validate(family.make_row(n), false);
        row.quantities = row_quantities(spec);
        for (double e : eps) {
          row.lindeberg[e] = guarded([&] { return lindeberg_functional(spec, e); });
          row.lindeberg_b[e] = guarded([&] { return lindeberg_b_functional(spec, e); });
        }
      } else {
        row.quantities = row_quantities(*family.gaussian, n);
        for (double e : eps) {
          row.lindeberg[e] = guarded([&] { return lindeberg_functional(*family.gaussian, n, e); });
          row.lindeberg_b[e] = guarded([&] { return lindeberg_b_functional(*family.gaussian, n, e); });
        }
      }
      row.cond_dob = guarded([&] { return condition_dob(row.quantities); });
      row.cond_log2 = guarded([&] { return condition_log2(row.quantities); });
      row.cond_cd = guarded([&] { return condition_dobrushin_cd(row.quantities); });

      const NormalizedSums sums = mc_normalized_sums(family, n, replicates, seed);
      row.normalization = sums.normalization;
      row.moments = sample_moments(sums.values);
      row.ks = ks_distance(sums.values);
    } catch (const Error& e) {
      row.error = e.what();
      row.ks = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows.push_back(std::move(row));
  }

  auto trace = [&](const std::string& name, auto&& pick) {
    ConditionTrace t;
    t.name = name;
    for (const auto& row : result.rows) {
      const ConditionValue v = pick(row);
      t.n.push_back(row.n);
      t.value.push_back(v.value);
      t.flag.push_back(v.flag);
    }
    t.verdict = classify_trend(t.value);
    result.traces.push_back(std::move(t));
  };
  trace("dob", [](const ExperimentRow& r) { return r.cond_dob; });
  trace("log2", [](const ExperimentRow& r) { return r.cond_log2; });
  trace("cd", [](const ExperimentRow& r) { return r.cond_cd; });
  for (double e : eps) {
    trace("lindeberg[eps=" + std::to_string(e) + "]", [e](const ExperimentRow& r) {
      const auto it = r.lindeberg.find(e);
      return it == r.lindeberg.end() ? ConditionValue{std::numeric_limits<double>::quiet_NaN(), "missing"}
                                     : it->second;
    });
    trace("lindeberg_b[eps=" + std::to_string(e) + "]", [e](const ExperimentRow& r) {
      const auto it = r.lindeberg_b.find(e);
      return it == r.lindeberg_b.end() ? ConditionValue{std::numeric_limits<double>::quiet_NaN(), "missing"}
                                       : it->second;
    });
  }
  return result;
}

}  // namespace mixclt
