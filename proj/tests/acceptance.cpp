// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "mixclt/clt_harness.hpp"
#include "mixclt/coefficients.hpp"
#include "mixclt/corpus.hpp"
#include "mixclt/families.hpp"
#include "mixclt/moments.hpp"

namespace fs = std::filesystem;
using namespace mixclt;

namespace {

constexpr std::uint64_t kCorpusSeed = 20240917;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// The randomized corpus (m <= 4, n <= 12) plus every finite built-in family.
const std::vector<ChainSpec>& full_corpus() {
  static const std::vector<ChainSpec> corpus = [] {
    auto c = random_corpus(kCorpusSeed, 1000, 4, 12);
    const auto fams = family_corpus();
    c.insert(c.end(), fams.begin(), fams.end());
    return c;
  }();
  return corpus;
}

std::vector<SpecVerification> run_groups(const std::vector<ChainSpec>& corpus, std::set<std::string> groups) {
  VerifyOptions opt;
  opt.groups = std::move(groups);
  return verify_corpus(corpus, opt);
}

struct Tally {
  std::size_t evaluated = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  std::string first_failure;

  void add(const std::string& spec, const CheckOutcome& c) {
    if (c.status == CheckStatus::Skipped) {
      ++skipped;
      return;
    }
    ++evaluated;
    if (c.failed()) {
      ++failed;
      if (first_failure.empty()) first_failure = spec + ": " + c.name + " lhs " + fmt(c.lhs) + " rhs " + fmt(c.rhs);
    }
  }
};

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

Verdict criterion_1() {
  const auto& corpus = full_corpus();
  const auto results = run_groups(corpus, {"variance"});
  Tally t;
  std::size_t sharp = 0;
  double worst_sharp = 0.0;
  bool sharp_ok = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool independent = corpus[i].n >= 2 && rho1_lambda(corpus[i]).rho1 == 0.0;
    if (independent) ++sharp;
    for (const auto& c : results[i].checks) {
      if (c.name == "variance_lambda_form") continue;
      t.add(results[i].name, c);
      if (independent && c.status != CheckStatus::Skipped) {
        worst_sharp = std::max(worst_sharp, std::fabs(c.margin));
        sharp_ok = sharp_ok && std::fabs(c.margin) <= 1e-10;
      }
    }
  }
  Verdict v;
  v.pass = t.failed == 0 && sharp_ok && sharp > 0;
  v.detail = std::to_string(corpus.size()) + " specs, " + std::to_string(t.evaluated) + " bounds, " +
             std::to_string(t.failed) + " failures; " + std::to_string(sharp) +
             " independent rows, worst sharp margin " + fmt(worst_sharp);
  if (!t.first_failure.empty()) v.detail += "; first failure " + t.first_failure;
  return v;
}

Verdict criterion_2() {
  const auto& corpus = full_corpus();
  const auto results = run_groups(corpus, {"delta"});
  Tally t;
  std::size_t restricted = 0;
  bool skips_consistent = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool contracting = delta1(corpus[i]) < 1.0;
    restricted += contracting;
    for (const auto& c : results[i].checks) {
      t.add(results[i].name, c);
      skips_consistent = skips_consistent && (contracting == (c.status != CheckStatus::Skipped));
    }
  }
  Verdict v;
  v.pass = t.failed == 0 && skips_consistent && t.evaluated == 2 * restricted;
  v.detail = std::to_string(restricted) + " specs with delta1 < 1, " + std::to_string(t.evaluated) + " bounds, " +
             std::to_string(t.failed) + " failures";
  if (!t.first_failure.empty()) v.detail += "; first failure " + t.first_failure;
  return v;
}

Verdict criterion_3() {
  const auto& corpus = full_corpus();
  const auto results = run_groups(corpus, {"coefficients"});
  Tally t;
  for (const auto& r : results)
    for (const auto& c : r.checks) t.add(r.name, c);

  double worst_equality = 0.0;
  std::size_t witnesses = 0;
  for (const auto& spec : corpus) {
    if (!starts_with(spec.name, "two-state")) continue;
    const auto rep = coefficient_report(spec);
    for (std::size_t k = 1; k <= rep.rho_k.size(); ++k) {
      worst_equality = std::max(worst_equality, std::fabs(rep.rho_k[k - 1] - std::pow(rep.rho1, static_cast<double>(k))));
      ++witnesses;
    }
  }
  Verdict v;
  v.pass = t.failed == 0 && witnesses > 0 && worst_equality <= 1e-10;
  v.detail = std::to_string(t.evaluated) + " inequalities, " + std::to_string(t.failed) + " failures; two-state " +
             "rho_k = rho1^k over " + std::to_string(witnesses) + " lags, worst |diff| " + fmt(worst_equality);
  if (!t.first_failure.empty()) v.detail += "; first failure " + t.first_failure;
  return v;
}

Verdict criterion_4() {
  const auto& corpus = full_corpus();
  double worst_cov = 0.0;
  double worst_enum = 0.0;
  std::size_t enumerated = 0;
  for (const auto& spec : corpus) {
    const double s2 = sigma_squared(spec);
    const double oracle = sigma_squared_covariance_sum(spec);
    worst_cov = std::max(worst_cov, std::fabs(s2 - oracle) / std::max(std::fabs(oracle), 1e-300));
    if (path_count(spec.m, spec.n) <= 100'000) {
      worst_enum = std::max(worst_enum, std::fabs(s2 - fixtures::brute_sum_squared(spec)));
      ++enumerated;
    }
  }
  const double reference = sigma_squared(fixtures::two_state(0.25, 3));
  Verdict v;
  v.pass = worst_cov <= 1e-9 && worst_enum <= 1e-10 && reference == 5.5;
  v.detail = "worst relative gap to covariance oracle " + fmt(worst_cov) + "; worst absolute gap to enumeration " +
             fmt(worst_enum) + " over " + std::to_string(enumerated) + " specs; two-state reference sigma^2 = " +
             fmt(reference);
  return v;
}

Verdict criterion_5() {
  const auto& corpus = full_corpus();
  double worst_path = 0.0;
  double worst_orth = 0.0;
  std::size_t enumerable = 0;
  for (const auto& spec : corpus) {
    const auto r = martingale_check(spec);
    if (r.pathwise) {
      ++enumerable;
      worst_path = std::max(worst_path, *r.pathwise);
    }
    worst_orth = std::max(worst_orth, r.orthogonality / std::max(1.0, sigma_squared(spec)));
  }
  Verdict v;
  v.pass = worst_path <= 1e-10 && worst_orth <= 1e-9;
  v.detail = "pathwise residual max " + fmt(worst_path) + " over " + std::to_string(enumerable) +
             " enumerable specs; orthogonality relative residual max " + fmt(worst_orth);
  return v;
}

Verdict criterion_6() {
  const auto corpus = random_corpus(kCorpusSeed + 1, 500, 3, 10);
  const auto results = run_groups(corpus, {"ppower", "exp"});
  Tally ppower;
  Tally exp_checks;
  std::size_t full_grids = 0;
  for (const auto& r : results) {
    std::size_t grid = 0;
    for (const auto& c : r.checks) {
      if (starts_with(c.name, "ppower")) ppower.add(r.name, c);
      if (starts_with(c.name, "exp")) {
        exp_checks.add(r.name, c);
        grid += starts_with(c.name, "exp[t=") && c.status != CheckStatus::Skipped;
      }
    }
    full_grids += grid == 5;
  }

  const auto two = lemma_exp_check(analyze(fixtures::two_state(0.25, 3)), {1.0 / 12.0});
  const double lhs = two.front().lhs;
  const double rhs = two.front().rhs;
  const bool reference = std::fabs(lhs - std::exp(1.0 / 16.0)) <= 1e-9 && std::fabs(lhs - 1.064494) <= 1e-6 &&
                         std::fabs(rhs - 2.488) <= 1e-3 && two.front().passed();

  Verdict v;
  v.pass = ppower.failed == 0 && exp_checks.failed == 0 && ppower.evaluated == 500 * 8 - ppower.skipped &&
           full_grids == 500 && reference;
  v.detail = std::to_string(ppower.evaluated) + " ppower checks, " + std::to_string(exp_checks.evaluated) +
             " exp checks (" + std::to_string(full_grids) + "/500 specs with 5 t values), " +
             std::to_string(ppower.failed + exp_checks.failed) + " failures; two-state LHS " + fmt(lhs) + " vs e^(1/16) " +
             fmt(std::exp(1.0 / 16.0)) + ", RHS " + fmt(rhs);
  if (!ppower.first_failure.empty()) v.detail += "; " + ppower.first_failure;
  if (!exp_checks.first_failure.empty()) v.detail += "; " + exp_checks.first_failure;
  return v;
}

Verdict criterion_7() {
  const auto fam = family_two_state(parse_rate("0.3"));
  const auto sums = mc_normalized_sums(fam, 2000, 20000, 42);
  const double ks = ks_distance(sums.values);
  const auto m = sample_moments(sums.values);
  Verdict v;
  v.pass = ks < 0.02 && std::fabs(m.variance - 1.0) <= 0.03;
  v.detail = "KS " + fmt(ks) + ", sample variance " + fmt(m.variance);
  return v;
}

Verdict criterion_8() {
  const auto fam = family_degenerate(0.5);
  const auto result = run_experiment(fam, {5000}, 20000, 42);
  const auto& row = result.rows.front();
  Verdict v;
  v.pass = row.error.empty() && row.ks > 0.1 && row.cond_log2.value < 1e-8 && std::isfinite(row.cond_dob.value) &&
           row.cond_dob.value > 1.0;
  v.detail = "KS " + fmt(row.ks) + ", lambda " + fmt(row.quantities.lambda) + ", (log2) value " +
             fmt(row.cond_log2.value) + ", (Dob) value " + fmt(row.cond_dob.value);
  return v;
}

Verdict criterion_9() {
  const auto fam = family_gaussian_ar1(0.5, {});
  const std::size_t n = 10000;
  const auto sums = mc_normalized_sums(fam, n, 20000, 42);
  const double ks = ks_distance(sums.values);
  const auto m = sample_moments(sums.values);
  // S_n / sqrt(n) = (S_n / sigma_n) * sigma_n / sqrt(n).
  const double scale = sums.sigma * sums.sigma / static_cast<double>(n);
  const double mc_var = m.variance * scale;
  const auto cd = condition_dobrushin_cd(row_quantities(*fam.gaussian, n));
  Verdict v;
  v.pass = ks < 0.02 && std::isinf(cd.value) && cd.flag == kFlagContraction && std::fabs(mc_var - 3.0) <= 0.1;
  v.detail = "KS " + fmt(ks) + ", (CD) " + fmt(cd.value) + " flagged " + cd.flag + ", var(S_n/sqrt n) " + fmt(mc_var);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the CLI into a fresh directory and returns the files it wrote.
std::vector<std::pair<std::string, std::string>> cli_outputs(const std::string& args, const fs::path& dir,
                                                             int& status) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = std::string("\"") + MIXCLT_CLI + "\" " + args + " --out-dir \"" + dir.string() +
                          "\" >/dev/null 2>&1";
  status = std::system(cmd.c_str());
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.emplace_back(entry.path().filename(), slurp(entry.path()));
  std::sort(files.begin(), files.end());
  return files;
}

Verdict criterion_10() {
  const fs::path root = fs::temp_directory_path() / ("mixclt_acceptance_" + std::to_string(::getpid()));
  struct Case {
    std::string label;
    std::string args;
  };
  const std::vector<Case> cases{
      {"selftest", "selftest --out json,csv"},
      {"clt", "clt --family two-state:a=c --c 0.3 --n 500,1000,2000 --replicates 20000 --seed 42 --out json,csv,plot"},
  };
  Verdict v;
  for (const auto& c : cases) {
    int s1 = 0;
    int s2 = 0;
    int s3 = 0;
    const auto a = cli_outputs(c.args + " --threads 1", root / (c.label + "_a"), s1);
    const auto b = cli_outputs(c.args + " --threads 1", root / (c.label + "_b"), s2);
    const auto d = cli_outputs(c.args + " --threads 8", root / (c.label + "_c"), s3);
    const bool same = !a.empty() && a == b && a == d;
    v.pass = v.pass && same && s1 == 0 && s2 == 0 && s3 == 0;
    std::size_t bytes = 0;
    for (const auto& f : a) bytes += f.second.size();
    v.detail += (v.detail.empty() ? "" : "; ") + c.label + ": " + std::to_string(a.size()) + " files, " +
                std::to_string(bytes) + " bytes, " + (same ? "identical" : "DIFFERENT") + " across repeat and 1 vs 8 threads";
  }
  fs::remove_all(root);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "variance bounds", 30.0, criterion_1},
      {2, "contraction variance bounds", 0.0, criterion_2},
      {3, "coefficient inequalities", 30.0, criterion_3},
      {4, "variance oracles", 0.0, criterion_4},
      {5, "martingale identities", 0.0, criterion_5},
      {6, "moment and exponential inequalities", 120.0, criterion_6},
      {7, "CLT positive experiment", 120.0, criterion_7},
      {8, "CLT negative experiment", 0.0, criterion_8},
      {9, "rho versus delta contrast", 0.0, criterion_9},
      {10, "determinism", 0.0, criterion_10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      v.pass = false;
      v.detail += "; exceeded " + fmt(c.limit_seconds) + " s";
    }
    failures += !v.pass;
    std::printf("[%s] criterion %d (%s): %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(),
                seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
