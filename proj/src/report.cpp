#include "mixclt/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mixclt {

nlohmann::json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

nlohmann::json numbers(const std::vector<double>& xs) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : xs) out.push_back(json_number(x));
  return out;
}

nlohmann::json to_json(const ConditionValue& v) {
  nlohmann::json out{{"value", json_number(v.value)}};
  if (!v.flag.empty()) out["flag"] = v.flag;
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json to_json(const CheckOutcome& check) {
  nlohmann::json out{{"name", check.name}, {"status", to_string(check.status)}};
  if (check.status != CheckStatus::Skipped || check.lhs != 0.0 || check.rhs != 0.0) {
    out["lhs"] = json_number(check.lhs);
    out["rhs"] = json_number(check.rhs);
    out["margin"] = json_number(check.margin);
    out["slack"] = json_number(check.slack);
  }
  if (!check.note.empty()) out["note"] = check.note;
  return out;
}

nlohmann::json to_json(const std::vector<CheckOutcome>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) out.push_back(to_json(c));
  return out;
}

nlohmann::json to_json(const CoefficientReport& report) {
  return {{"m", report.m},
          {"n", report.n},
          {"rho_k", numbers(report.rho_k)},
          {"rho1", json_number(report.rho1)},
          {"lambda", json_number(report.lambda)},
          {"delta_steps", numbers(report.delta_steps)},
          {"delta1", json_number(report.delta1)},
          {"alpha", json_number(report.alpha())},
          {"checks", to_json(report.checks)}};
}

nlohmann::json to_json(const MomentReport& report) {
  nlohmann::json ea = nlohmann::json::array();
  for (const auto& [p, v] : report.EA_p) ea.push_back({{"p", p}, {"sum_E_abs_A_pow_p", json_number(v)}});
  nlohmann::json out{{"b2", json_number(report.b2)},
                     {"sigma2", json_number(report.sigma2)},
                     {"sigma2_oracle", json_number(report.sigma2_oracle)},
                     {"EA_p", ea},
                     {"mart_residual", json_number(report.mart_residual)},
                     {"bound_checks", to_json(report.bound_checks)}};
  out["sigma2_enumerated"] = report.sigma2_enumerated ? json_number(*report.sigma2_enumerated) : nlohmann::json();
  out["pathwise_residual"] = report.pathwise_residual ? json_number(*report.pathwise_residual) : nlohmann::json();
  return out;
}

nlohmann::json to_json(const ExperimentResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row{{"n", r.n},
                       {"replicates", r.replicates},
                       {"seed", r.seed},
                       {"C", json_number(r.quantities.C)},
                       {"rho1", json_number(r.quantities.rho1)},
                       {"lambda", json_number(r.quantities.lambda)},
                       {"delta1", json_number(r.quantities.delta1)},
                       {"alpha", json_number(r.quantities.alpha())},
                       {"sigma", json_number(r.quantities.sigma)},
                       {"b", json_number(r.quantities.b)},
                       {"ks", json_number(r.ks)},
                       {"sample_mean", json_number(r.moments.mean)},
                       {"sample_variance", json_number(r.moments.variance)},
                       {"sample_excess_kurtosis", json_number(r.moments.excess_kurtosis)},
                       {"cond_dob", to_json(r.cond_dob)},
                       {"cond_log2", to_json(r.cond_log2)},
                       {"cond_cd", to_json(r.cond_cd)},
                       {"normalization", r.normalization}};
    nlohmann::json lind = nlohmann::json::array();
    for (const auto& [eps, v] : r.lindeberg) {
      nlohmann::json e = to_json(v);
      e["eps"] = eps;
      lind.push_back(e);
    }
    nlohmann::json lind_b = nlohmann::json::array();
    for (const auto& [eps, v] : r.lindeberg_b) {
      nlohmann::json e = to_json(v);
      e["eps"] = eps;
      lind_b.push_back(e);
    }
    row["lindeberg"] = lind;
    row["lindeberg_b"] = lind_b;
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(row);
  }
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : result.traces) {
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : t.flag) flags.push_back(f);
    traces.push_back({{"name", t.name},
                      {"n", t.n},
                      {"value", numbers(t.value)},
                      {"flag", flags},
                      {"verdict", t.verdict},
                      {"heuristic", t.heuristic}});
  }
  return {{"family", result.family},
          {"n_grid", result.n_grid},
          {"replicates", result.replicates},
          {"seed", result.seed},
          {"eps", numbers(result.eps)},
          {"rows", rows},
          {"traces", traces}};
}

nlohmann::json to_json(const SpecVerification& verification) {
  return {{"name", verification.name},
          {"m", verification.m},
          {"n", verification.n},
          {"status", verification.failed() ? "fail" : "pass"},
          {"checks", to_json(verification.checks)}};
}

nlohmann::json to_json(const GroupSummary& s) {
  return {{"group", s.group},
          {"evaluated", s.evaluated},
          {"passed", s.passed},
          {"failed", s.failed},
          {"skipped", s.skipped},
          {"worst_headroom", json_number(s.worst_headroom)},
          {"worst_check", s.worst_check}};
}

std::string to_csv(const CoefficientReport& report) {
  std::ostringstream os;
  os << "k,rho_k,rho1_pow_k,delta1,sqrt_delta1,delta1_pow_k\n";
  for (std::size_t k = 1; k <= report.rho_k.size(); ++k) {
    const double kk = static_cast<double>(k);
    os << k << ',' << csv_number(report.rho_k[k - 1]) << ',' << csv_number(std::pow(report.rho1, kk)) << ','
       << csv_number(report.delta1) << ',' << csv_number(std::sqrt(report.delta1)) << ','
       << csv_number(std::pow(report.delta1, kk)) << '\n';
  }
  return os.str();
}

std::string to_csv(const std::vector<CheckOutcome>& checks) {
  std::ostringstream os;
  os << "check_name,lhs,rhs,margin,status\n";
  for (const auto& c : checks) {
    os << csv_escape(c.name) << ',' << csv_number(c.lhs) << ',' << csv_number(c.rhs) << ','
       << csv_number(c.margin) << ',' << to_string(c.status) << '\n';
  }
  return os.str();
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "n,lambda,sigma,ks,cond_dob,cond_log2,cond_cd,flags\n";
  for (const auto& r : result.rows) {
    std::string flags;
    auto add = [&](const std::string& tag, const std::string& flag) {
      if (flag.empty()) return;
      if (!flags.empty()) flags += ';';
      flags += tag + ':' + flag;
    };
    add("dob", r.cond_dob.flag);
    add("log2", r.cond_log2.flag);
    add("cd", r.cond_cd.flag);
    if (!r.error.empty()) add("error", r.error);
    os << r.n << ',' << csv_number(r.quantities.lambda) << ',' << csv_number(r.quantities.sigma) << ','
       << csv_number(r.ks) << ',' << csv_number(r.cond_dob.value) << ',' << csv_number(r.cond_log2.value) << ','
       << csv_number(r.cond_cd.value) << ',' << csv_escape(flags) << '\n';
  }
  return os.str();
}

std::string to_csv(const std::vector<GroupSummary>& summary) {
  std::ostringstream os;
  os << "group,evaluated,passed,failed,skipped,worst_headroom,worst_check\n";
  for (const auto& g : summary) {
    os << csv_escape(g.group) << ',' << g.evaluated << ',' << g.passed << ',' << g.failed << ',' << g.skipped << ','
       << csv_number(g.worst_headroom) << ',' << csv_escape(g.worst_check) << '\n';
  }
  return os.str();
}

std::string ks_plot_data(const ExperimentResult& result) {
  std::ostringstream os;
  os << "# n ks\n";
  for (const auto& r : result.rows) os << r.n << ' ' << csv_number(r.ks) << '\n';
  return os.str();
}

std::string condition_plot_data(const ExperimentResult& result, const std::string& trace) {
  std::ostringstream os;
  os << "# n " << trace << '\n';
  for (const auto& t : result.traces) {
    if (t.name != trace) continue;
    for (std::size_t i = 0; i < t.n.size(); ++i) os << t.n[i] << ' ' << csv_number(t.value[i]) << '\n';
  }
  return os.str();
}

}  // namespace mixclt
