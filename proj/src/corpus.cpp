#include "mixclt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mixclt/error.hpp"
#include "mixclt/families.hpp"
#include "mixclt/moments.hpp"
#include "mixclt/tolerances.hpp"

namespace mixclt {

const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> groups{"coefficients", "variance", "delta", "est1",
                                               "oracle",       "martingale", "ppower", "exp"};
  return groups;
}

namespace {

CheckOutcome close_to(std::string name, double value, double reference, double tolerance) {
  auto c = check_le(std::move(name), std::fabs(value - reference), 0.0, tolerance);
  c.note = "value " + std::to_string(value) + " vs reference " + std::to_string(reference);
  return c;
}

void append(std::vector<CheckOutcome>& into, std::vector<CheckOutcome> more) {
  for (auto& c : more) into.push_back(std::move(c));
}

}  // namespace

SpecVerification verify_spec(const ChainSpec& spec, const VerifyOptions& options) {
  SpecVerification out;
  out.name = spec.name;
  out.m = spec.m;
  out.n = spec.n;
  const ChainAnalysis a = analyze(spec);
  const auto& g = options.groups;
  const bool enumerable = path_count(spec.m, spec.n) <= options.enumeration_cap;

  if (g.count("coefficients")) append(out.checks, a.coefficients.checks);
  if (g.count("variance")) append(out.checks, variance_bounds_check(a, options.rel));
  if (g.count("delta")) append(out.checks, delta_variance_bounds_check(a, options.rel));
  if (g.count("est1")) out.checks.push_back(est1_check(a, options.rel));

  if (g.count("oracle")) {
    const double oracle = sigma_squared_covariance_sum(spec, a.laws);
    out.checks.push_back(close_to("sigma2_covariance_oracle", a.sigma2, oracle,
                                  options.rel * std::max(std::fabs(a.sigma2), std::fabs(oracle)) + tol::kAbsolute));
    if (path_count(spec.m, spec.n) <= options.oracle_enumeration_cap) {
      const double enumerated = enumerate_expectation(spec, [&](std::span<const State> path) {
        const double s = path_sum(spec, path);
        return s * s;
      });
      out.checks.push_back(close_to("sigma2_enumeration_oracle", a.sigma2, enumerated,
                                    tol::kDerived * std::max(1.0, std::fabs(enumerated))));
    } else {
      out.checks.push_back(skipped("sigma2_enumeration_oracle", "m^n above the oracle enumeration cap"));
    }
  }

  if (g.count("martingale")) {
    const MartingaleResiduals r = martingale_check(spec, enumerable ? options.enumeration_cap : 0);
    if (r.pathwise) {
      out.checks.push_back(check_le("martingale_pathwise", *r.pathwise, 0.0, tol::kDerived));
    } else {
      out.checks.push_back(skipped("martingale_pathwise", "StateSpaceTooLarge"));
    }
    out.checks.push_back(check_le("martingale_orthogonality", r.orthogonality, 0.0,
                                  options.rel * std::max(1.0, a.sigma2)));
  }

  if (g.count("ppower")) {
    for (double p : options.p_orders) append(out.checks, lemma_ppower_check(a, p, options.rel));
  }

  if (g.count("exp")) {
    if (enumerable) {
      append(out.checks, lemma_exp_check(a, default_exp_grid(a), options.rel, options.enumeration_cap));
    } else {
      out.checks.push_back(skipped("exp", "StateSpaceTooLarge"));
    }
  }
  return out;
}

std::vector<ChainSpec> random_corpus(std::uint64_t master_seed, std::size_t count, std::size_t max_m,
                                     std::size_t max_n) {
  if (max_m < 2 || max_n < 1) throw Error(ErrorKind::InvalidArgument, "corpus needs max_m >= 2, max_n >= 1");
  std::vector<ChainSpec> corpus;
  corpus.reserve(count);
  for (std::size_t index = 0; index < count; ++index) {
    PhiloxStream shape(master_seed, mix_stream_id({0x636f72707573ULL, index}));  // "corpus"
    const auto m = 2 + static_cast<std::size_t>(shape.next_uniform() * static_cast<double>(max_m - 1));
    const auto n = 1 + static_cast<std::size_t>(shape.next_uniform() * static_cast<double>(max_n));
    const std::uint64_t seed = mix_stream_id({master_seed, index});
    ChainSpec spec;
    if (index % 8 == 7) {
      Eigen::VectorXd pi(static_cast<Eigen::Index>(m));
      Eigen::VectorXd f(static_cast<Eigen::Index>(m));
      for (Eigen::Index x = 0; x < pi.size(); ++x) pi[x] = shape.next_uniform();
      for (Eigen::Index x = 0; x < f.size(); ++x) f[x] = 2.0 * shape.next_uniform() - 1.0;
      pi /= pi.sum();
      f.array() -= pi.dot(f);
      spec = validate(family_iid(pi, f).make_row(n), true);
    } else {
      spec = family_random(m, seed, 0.0).make_row(n);
    }
    spec.name = "corpus[" + std::to_string(index) + "]";
    corpus.push_back(std::move(spec));
  }
  return corpus;
}

std::vector<ChainSpec> family_corpus() {
  RateExpr quarter_power;
  quarter_power.kind = RateExpr::Kind::Power;
  quarter_power.c = 0.5;
  quarter_power.g = 0.25;
  const std::vector<TriangularFamily> families{
      family_iid(),
      family_iid(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Vector3d(-1.3, -0.3, 0.7)),
      family_two_state(parse_rate("0.25")),
      family_two_state(parse_rate("0.1")),
      family_two_state(parse_rate("0.5")),
      family_two_state(quarter_power),
      family_degenerate(0.5),
      family_random(3, 7, 0.1),
  };
  std::vector<ChainSpec> corpus;
  for (const auto& family : families) {
    for (std::size_t n : {2, 3, 5, 8, 13, 21}) {
      ChainSpec spec = validate(family.make_row(n), true);
      spec.name = family.descriptor + "@n=" + std::to_string(n);
      corpus.push_back(std::move(spec));
    }
  }
  return corpus;
}

std::vector<SpecVerification> verify_corpus_serial(const std::vector<ChainSpec>& corpus,
                                                   const VerifyOptions& options) {
  std::vector<SpecVerification> out;
  out.reserve(corpus.size());
  for (const auto& spec : corpus) out.push_back(verify_spec(spec, options));
  return out;
}

std::vector<SpecVerification> verify_corpus(const std::vector<ChainSpec>& corpus, const VerifyOptions& options) {
  std::vector<SpecVerification> out(corpus.size());
  const auto count = static_cast<long long>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = verify_spec(corpus[static_cast<std::size_t>(i)], options);
  }
  return out;
}

std::vector<GroupSummary> summarize(const std::vector<SpecVerification>& results) {
  std::vector<GroupSummary> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& spec : results) {
    for (const auto& c : spec.checks) {
      const std::string key = c.name.substr(0, c.name.find('['));
      auto [it, inserted] = index.emplace(key, groups.size());
      if (inserted) {
        GroupSummary s;
        s.group = key;
        s.worst_headroom = std::numeric_limits<double>::infinity();
        groups.push_back(s);
      }
      GroupSummary& s = groups[it->second];
      if (c.status == CheckStatus::Skipped) {
        ++s.skipped;
        continue;
      }
      ++s.evaluated;
      c.failed() ? ++s.failed : ++s.passed;
      const double headroom = c.margin + c.slack;
      if (headroom < s.worst_headroom) {
        s.worst_headroom = headroom;
        s.worst_check = spec.name + ": " + c.name;
      }
    }
  }
  return groups;
}

}  // namespace mixclt
