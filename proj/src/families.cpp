#include "mixclt/families.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include "mixclt/coefficients.hpp"
#include "mixclt/error.hpp"
#include "mixclt/numeric.hpp"

namespace mixclt {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

double parse_number(const std::string& text, const std::string& what, std::optional<double> c_binding,
                    ErrorKind kind) {
  if (text == "c") {
    if (!c_binding) throw Error(kind, what + " uses the symbol c but no value was bound (use --c)");
    return *c_binding;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(kind, what + ": '" + text + "' is not a number");
  }
}

ChainSpec two_state_row(std::size_t n, double a, const std::string& name) {
  ChainSpec spec;
  spec.m = 2;
  spec.n = n;
  spec.name = name;
  spec.initial = Eigen::Vector2d(0.5, 0.5);
  Eigen::MatrixXd q(2, 2);
  q << 1.0 - a, a, a, 1.0 - a;
  spec.transitions.assign(n - 1, q);
  spec.f.assign(n, Eigen::Vector2d(-1.0, 1.0));
  return spec;
}

AnalyticMetadata two_state_analytic(std::size_t n, double a) {
  AnalyticMetadata meta;
  const double r = 1.0 - 2.0 * a;
  meta.rho1 = n >= 2 ? r : 0.0;
  meta.lambda = 1.0 - *meta.rho1;
  meta.delta1 = n >= 2 ? r : 0.0;
  meta.sigma2 = two_state_sigma2(n, r);
  return meta;
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::map<std::string, std::string> split_params(const std::string& text, const std::string& family) {
  std::map<std::string, std::string> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::ParseError, family + ": parameter '" + item + "' is not key=value");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

Eigen::VectorXd parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '/')) values.push_back(parse_number(item, what, std::nullopt, ErrorKind::ParseError));
  if (values.empty()) throw Error(ErrorKind::ParseError, what + " is empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void reject_unknown(const std::map<std::string, std::string>& params, std::initializer_list<const char*> known,
                    const std::string& family) {
  for (const auto& [key, value] : params) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorKind::ParseError, family + ": unknown parameter '" + key + "'");
    }
  }
}

}  // namespace

double RateExpr::operator()(std::size_t n) const {
  const double nn = static_cast<double>(n);
  switch (kind) {
    case Kind::Constant: return c;
    case Kind::OverN: return c / nn;
    case Kind::Power: return c * std::pow(nn, -g);
    case Kind::MinHalfOverN: return std::min(0.5, c / nn);
  }
  return c;
}

std::string RateExpr::to_string() const {
  switch (kind) {
    case Kind::Constant: return fmt(c);
    case Kind::OverN: return fmt(c) + "/n";
    case Kind::Power: return fmt(c) + "*n^(-" + fmt(g) + ")";
    case Kind::MinHalfOverN: return "min(0.5," + fmt(c) + "/n)";
  }
  return fmt(c);
}

RateExpr parse_rate(const std::string& text, std::optional<double> c_binding) {
  static const std::regex constant(R"(^\s*([^/*\s]+)\s*$)");
  static const std::regex over_n(R"(^\s*([^/*\s]+)\s*/\s*n\s*$)");
  static const std::regex power(R"(^\s*([^/*\s]+)\s*\*\s*n\s*\^\s*\(\s*-\s*([^)\s]+)\s*\)\s*$)");
  static const std::regex over_power(R"(^\s*([^/*\s]+)\s*/\s*n\s*\^\s*\(?\s*([^)\s]+?)\s*\)?\s*$)");
  std::smatch match;
  RateExpr rate;
  auto num = [&](const std::string& s) { return parse_number(s, "rate '" + text + "'", c_binding, ErrorKind::InvalidRate); };
  if (std::regex_match(text, match, over_n)) {
    rate.kind = RateExpr::Kind::OverN;
    rate.c = num(match[1]);
  } else if (std::regex_match(text, match, power)) {
    rate.kind = RateExpr::Kind::Power;
    rate.c = num(match[1]);
    rate.g = num(match[2]);
  } else if (std::regex_match(text, match, over_power)) {
    rate.kind = RateExpr::Kind::Power;
    rate.c = num(match[1]);
    rate.g = num(match[2]);
  } else if (std::regex_match(text, match, constant)) {
    rate.kind = RateExpr::Kind::Constant;
    rate.c = num(match[1]);
  } else {
    throw Error(ErrorKind::InvalidRate, "rate '" + text + "' does not match c, c/n or c*n^(-g)");
  }
  return rate;
}

std::string GaussianObservation::to_string() const {
  return kind == Kind::Identity ? std::string("identity") : "clip(" + fmt(clip) + ")";
}

GaussianAr1::GaussianAr1(double phi, GaussianObservation f) : phi_(phi), f_(f) {
  if (!(std::fabs(phi) < 1.0)) throw Error(ErrorKind::InvalidPhi, "|phi| must be < 1, got " + fmt(phi));
  if (f.kind == GaussianObservation::Kind::Identity) {
    variance_ = 1.0;
    hermite_sq_ = {1.0};
    return;
  }
  if (!(f.clip > 0.0)) throw Error(ErrorKind::InvalidArgument, "clip level must be positive");
  const double c = f.clip;
  variance_ = 2.0 * std_normal_cdf(c) - 1.0 - 2.0 * c * std_normal_pdf(c) + 2.0 * c * c * (1.0 - std_normal_cdf(c));

  // a_j = E f(Z) h_j(Z) with h_j the normalized probabilists' Hermite
  // polynomials; composite Simpson on pieces where f is smooth.
  constexpr int kOrders = 160;
  constexpr int kIntervals = 6000;
  constexpr double kEdge = 14.0;
  std::vector<CompensatedSum> coef(kOrders + 1);
  const double pieces[4] = {-kEdge, -c, c, kEdge};
  std::vector<double> h(kOrders + 1);
  for (int piece = 0; piece < 3; ++piece) {
    const double lo = pieces[piece];
    const double hi = pieces[piece + 1];
    if (hi <= lo) continue;
    const double step = (hi - lo) / kIntervals;
    for (int i = 0; i <= kIntervals; ++i) {
      const double x = lo + step * i;
      const double weight = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double base = weight * step / 3.0 * f(x) * std_normal_pdf(x);
      h[0] = 1.0;
      h[1] = x;
      for (int j = 1; j < kOrders; ++j) {
        h[j + 1] = (x * h[j] - std::sqrt(static_cast<double>(j)) * h[j - 1]) / std::sqrt(static_cast<double>(j + 1));
      }
      for (int j = 0; j <= kOrders; ++j) coef[j] += base * h[j];
    }
  }
  hermite_sq_.clear();
  for (int j = 1; j <= kOrders; ++j) hermite_sq_.push_back(coef[j].value() * coef[j].value());
}

double GaussianAr1::lag_covariance(std::size_t k) const {
  if (k == 0) return variance_;
  const double base = std::pow(phi_, static_cast<double>(k));
  double power = 1.0;
  CompensatedSum acc;
  for (double a2 : hermite_sq_) {
    power *= base;
    acc += a2 * power;
  }
  return acc.value();
}

double GaussianAr1::sigma2(std::size_t n) const {
  CompensatedSum acc;
  acc += static_cast<double>(n) * variance_;
  // cov_k = sum_j a_j^2 phi^{kj}; advance phi^{kj} one lag at a time.
  std::vector<double> step(hermite_sq_.size());
  std::vector<double> power(hermite_sq_.size());
  double pj = 1.0;
  for (std::size_t j = 0; j < step.size(); ++j) {
    pj *= phi_;
    step[j] = pj;
    power[j] = 1.0;
  }
  for (std::size_t k = 1; k < n; ++k) {
    double cov = 0.0;
    for (std::size_t j = 0; j < step.size(); ++j) {
      power[j] *= step[j];
      cov += hermite_sq_[j] * power[j];
    }
    const double term = 2.0 * static_cast<double>(n - k) * cov;
    acc += term;
    // Covariances decay at least like |phi|^k.
    if (std::fabs(term) <= 1e-18 * (1.0 - std::fabs(phi_)) * acc.value()) break;
  }
  return acc.value();
}

double GaussianAr1::sample_sum(PhiloxStream& stream, std::size_t n) const {
  const double innovation = std::sqrt(1.0 - phi_ * phi_);
  double x = stream.next_normal();
  double sum = f_(x);
  for (std::size_t i = 1; i < n; ++i) {
    x = phi_ * x + innovation * stream.next_normal();
    sum += f_(x);
  }
  return sum;
}

double two_state_sigma2(std::size_t n, double r) {
  CompensatedSum acc;
  acc += static_cast<double>(n);
  double power = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    power *= r;
    const double term = 2.0 * static_cast<double>(n - k) * power;
    acc += term;
    // Remaining terms sum to less than term / (1 - |r|); stop once that is
    // below double resolution of the total.
    if (std::fabs(term) <= 1e-18 * (1.0 - std::fabs(r)) * acc.value()) break;
  }
  return acc.value();
}

TriangularFamily family_iid(const Eigen::VectorXd& pi, const Eigen::VectorXd& f) {
  if (pi.size() != f.size() || pi.size() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "iid family: pi and f must have the same positive length");
  }
  // Validate once on a two-step row so bad input fails at construction.
  ChainSpec probe;
  probe.m = static_cast<std::size_t>(pi.size());
  probe.n = 2;
  probe.initial = pi;
  probe.transitions.assign(1, pi.transpose().replicate(pi.size(), 1));
  probe.f.assign(2, f);
  validate(probe, false);

  double variance = 0.0;
  for (Eigen::Index x = 0; x < pi.size(); ++x) variance += pi[x] * f[x] * f[x];

  TriangularFamily fam;
  fam.name = "iid";
  std::ostringstream desc;
  desc << "iid:pi=";
  for (Eigen::Index x = 0; x < pi.size(); ++x) desc << (x ? "/" : "") << fmt(pi[x]);
  desc << ",f=";
  for (Eigen::Index x = 0; x < f.size(); ++x) desc << (x ? "/" : "") << fmt(f[x]);
  fam.descriptor = desc.str();
  fam.description = "independent rows, every transition row equals pi";
  fam.make_row = [pi, f, name = fam.descriptor](std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "row length must be at least 1");
    ChainSpec spec;
    spec.m = static_cast<std::size_t>(pi.size());
    spec.n = n;
    spec.name = name;
    spec.initial = pi;
    spec.transitions.assign(n - 1, pi.transpose().replicate(pi.size(), 1));
    spec.f.assign(n, f);
    return spec;
  };
  fam.analytic = [variance](std::size_t n) {
    AnalyticMetadata meta;
    meta.rho1 = 0.0;
    meta.lambda = 1.0;
    meta.delta1 = 0.0;
    meta.sigma2 = static_cast<double>(n) * variance;
    return meta;
  };
  return fam;
}

TriangularFamily family_iid() { return family_iid(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(-1.0, 1.0)); }

TriangularFamily family_two_state(RateExpr rate) {
  TriangularFamily fam;
  fam.name = "two-state";
  fam.descriptor = "two-state:a=" + rate.to_string();
  fam.description = "symmetric two-state chain, flip probability a_n, f = (-1, +1)";
  auto checked_rate = [rate](std::size_t n) {
    const double a = rate(n);
    if (!(a > 0.0 && a <= 0.5)) {
      throw Error(ErrorKind::InvalidRate, "a_n = " + fmt(a) + " at n = " + std::to_string(n) + " is outside (0, 0.5]");
    }
    return a;
  };
  fam.make_row = [checked_rate, name = fam.descriptor](std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "row length must be at least 1");
    return two_state_row(n, checked_rate(n), name);
  };
  fam.analytic = [checked_rate](std::size_t n) { return two_state_analytic(n, checked_rate(n)); };
  return fam;
}

TriangularFamily family_degenerate(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "degenerate family needs c > 0");
  RateExpr rate;
  rate.kind = RateExpr::Kind::MinHalfOverN;
  rate.c = c;
  TriangularFamily fam = family_two_state(rate);
  fam.name = "degenerate";
  fam.descriptor = "degenerate:c=" + fmt(c);
  fam.description = "two-state chain with a_n = min(0.5, c/n); O(1) flips per row, CLT fails";
  auto make = fam.make_row;
  fam.make_row = [make, name = fam.descriptor](std::size_t n) {
    ChainSpec spec = make(n);
    spec.name = name;
    return spec;
  };
  return fam;
}

TriangularFamily family_random(std::size_t m, std::uint64_t seed, double mixing_floor) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "random family needs m >= 2");
  if (!(mixing_floor >= 0.0 && mixing_floor < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "mixing_floor must lie in [0, 1)");
  }
  TriangularFamily fam;
  fam.name = "random";
  fam.descriptor = "random:m=" + std::to_string(m) + ",seed=" + std::to_string(seed) + ",floor=" + fmt(mixing_floor);
  fam.description = "seeded random rows with lag-1 coefficient at most 1 - floor";
  fam.make_row = [m, seed, mixing_floor, name = fam.descriptor](std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "row length must be at least 1");
    constexpr std::uint64_t kTag = 0x72616e646f6d726fULL;  // "randomro"
    constexpr int kBudget = 10'000;
    static constexpr double kExponents[3] = {1.0, 4.0, 12.0};
    const double kappa = kExponents[seed % 3];
    PhiloxStream stream(seed, mix_stream_id({kTag, m, n}));
    const auto dim = static_cast<Eigen::Index>(m);

    auto draw_law = [&]() {
      Eigen::VectorXd w(dim);
      for (Eigen::Index y = 0; y < dim; ++y) w[y] = std::pow(stream.next_uniform(), kappa);
      return Eigen::VectorXd(w / w.sum());
    };

    ChainSpec spec;
    spec.m = m;
    spec.n = n;
    spec.name = name;
    spec.initial = draw_law();
    Eigen::VectorXd pi = spec.initial;
    int attempts = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      while (true) {
        Eigen::MatrixXd q(dim, dim);
        for (Eigen::Index x = 0; x < dim; ++x) q.row(x) = draw_law().transpose();
        const Eigen::MatrixXd joint = pi.asDiagonal() * q;
        if (max_correlation(joint) <= 1.0 - mixing_floor) {
          spec.transitions.push_back(q);
          pi = q.transpose() * pi;
          break;
        }
        if (++attempts >= kBudget) {
          throw Error(ErrorKind::RejectionBudgetExceeded,
                      name + ": no acceptable transition after " + std::to_string(kBudget) + " draws");
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd fi(dim);
      for (Eigen::Index x = 0; x < dim; ++x) fi[x] = 2.0 * stream.next_uniform() - 1.0;
      spec.f.push_back(fi);
    }
    return validate(spec, true);
  };
  return fam;
}

TriangularFamily family_gaussian_ar1(double phi, GaussianObservation f) {
  TriangularFamily fam;
  fam.gaussian.emplace(phi, f);
  fam.name = "gaussian-ar1";
  fam.descriptor = "gaussian-ar1:phi=" + fmt(phi) + ",f=" + f.to_string();
  fam.description = "stationary Gaussian AR(1), sampler only; rho1 = |phi| while delta1 = 1";
  const GaussianAr1 model = *fam.gaussian;
  fam.analytic = [model](std::size_t n) {
    AnalyticMetadata meta;
    meta.rho1 = n >= 2 ? std::fabs(model.phi()) : 0.0;
    meta.lambda = 1.0 - *meta.rho1;
    meta.delta1 = n >= 2 ? 1.0 : 0.0;
    meta.sigma2 = model.sigma2(n);
    return meta;
  };
  return fam;
}

TriangularFamily parse_family(const std::string& descriptor, std::optional<double> c_binding) {
  const auto colon = descriptor.find(':');
  const std::string name = descriptor.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : descriptor.substr(colon + 1);
  const auto params = split_params(rest, name);
  auto require = [&](const char* key) -> const std::string& {
    const auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorKind::ParseError, name + ": missing parameter '" + key + "'");
    return it->second;
  };
  auto number = [&](const char* key) {
    return parse_number(require(key), name + " parameter " + key, c_binding, ErrorKind::ParseError);
  };

  if (name == "iid") {
    reject_unknown(params, {"pi", "f"}, name);
    if (params.empty()) return family_iid();
    return family_iid(parse_list(require("pi"), "iid pi"), parse_list(require("f"), "iid f"));
  }
  if (name == "two-state") {
    reject_unknown(params, {"a"}, name);
    return family_two_state(parse_rate(require("a"), c_binding));
  }
  if (name == "degenerate") {
    reject_unknown(params, {"c"}, name);
    return family_degenerate(number("c"));
  }
  if (name == "random") {
    reject_unknown(params, {"m", "seed", "floor"}, name);
    const double m = number("m");
    const std::string& seed_text = require("seed");
    std::uint64_t seed = 0;
    const char* end = seed_text.data() + seed_text.size();
    const auto [ptr, ec] = std::from_chars(seed_text.data(), end, seed);
    if (seed_text.empty() || ec != std::errc() || ptr != end) {
      throw Error(ErrorKind::ParseError, "random: seed '" + seed_text + "' is not an unsigned integer");
    }
    const double floor = params.count("floor") ? number("floor") : 0.0;
    if (m < 2 || m != std::floor(m)) throw Error(ErrorKind::ParseError, "random: m must be an integer >= 2");
    return family_random(static_cast<std::size_t>(m), seed, floor);
  }
  if (name == "gaussian-ar1") {
    reject_unknown(params, {"phi", "f", "clip"}, name);
    GaussianObservation obs;
    const auto it = params.find("f");
    if (it == params.end() || it->second == "identity") {
      obs.kind = GaussianObservation::Kind::Identity;
    } else if (it->second == "clip") {
      obs.kind = GaussianObservation::Kind::Clip;
      obs.clip = params.count("clip") ? number("clip") : 1.0;
    } else {
      throw Error(ErrorKind::ParseError, "gaussian-ar1: f must be identity or clip");
    }
    return family_gaussian_ar1(number("phi"), obs);
  }
  throw Error(ErrorKind::ParseError, "unknown family '" + name + "'");
}

std::vector<FamilyInfo> builtin_families() {
  return {
      {"iid", "iid[:pi=P0/P1/..,f=F0/F1/..]", "independent rows; default uniform two-state +-1"},
      {"two-state", "two-state:a=RATE", "symmetric two-state chain with flip probability a_n (RATE: c, c/n, c*n^(-g))"},
      {"degenerate", "degenerate:c=NUM", "two-state chain with a_n = min(0.5, c/n); CLT fails"},
      {"random", "random:m=INT,seed=U64[,floor=NUM]", "seeded random rows, lag-1 coefficient <= 1 - floor"},
      {"gaussian-ar1", "gaussian-ar1:phi=NUM[,f=identity|clip][,clip=NUM]",
       "stationary Gaussian AR(1), sampler only; delta1 = 1 while rho1 = |phi|"},
  };
}

}  // namespace mixclt
