#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "mixclt/coefficients.hpp"
#include "mixclt/corpus.hpp"
#include "mixclt/report.hpp"

using namespace mixclt;

TEST_CASE("random_corpus is deterministic and mixes in iid rows") {
  const auto a = random_corpus(123, 40, 4, 12);
  const auto b = random_corpus(123, 40, 4, 12);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].m >= 2);
    CHECK(a[i].m <= 4);
    CHECK(a[i].n >= 1);
    CHECK(a[i].n <= 12);
    CHECK(a[i].transitions == b[i].transitions);
    CHECK(a[i].f == b[i].f);
    if (i % 8 == 7 && a[i].n >= 2) CHECK(rho1_lambda(a[i]).rho1 == 0.0);
  }
  const auto c = random_corpus(124, 40, 4, 12);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].f != c[i].f;
  CHECK(differs);
}

TEST_CASE("verify_spec on the reference row") {
  const auto v = verify_spec(fixtures::two_state(0.25, 3), VerifyOptions{});
  CHECK_FALSE(v.failed());
  std::set<std::string> prefixes;
  for (const auto& c : v.checks) prefixes.insert(c.name.substr(0, c.name.find('[')));
  for (const char* name : {"variance_lower", "variance_upper", "delta_variance_lower", "est1",
                           "sigma2_covariance_oracle", "sigma2_enumeration_oracle", "martingale_pathwise",
                           "martingale_orthogonality", "ppower_general", "ppower_geometric", "exp_at_t_max"}) {
    INFO(name);
    CHECK(prefixes.count(name) == 1);
  }

  VerifyOptions only;
  only.groups = {"variance"};
  for (const auto& c : verify_spec(fixtures::two_state(0.25, 3), only).checks)
    CHECK(c.name.rfind("variance", 0) == 0);
}

TEST_CASE("verify_corpus matches the serial reference and passes") {
  auto corpus = random_corpus(9, 60, 3, 8);
  const auto fams = family_corpus();
  corpus.insert(corpus.end(), fams.begin(), fams.end());
  const auto par = verify_corpus(corpus, VerifyOptions{});
  const auto ser = verify_corpus_serial(corpus, VerifyOptions{});
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(to_json(par[i]).dump() == to_json(ser[i]).dump());
    for (const auto& c : par[i].checks) {
      INFO(par[i].name << " " << c.name << " " << c.lhs << " " << c.rhs);
      CHECK_FALSE(c.failed());
    }
  }
  const auto summary = summarize(par);
  CHECK_FALSE(summary.empty());
  for (const auto& g : summary) {
    CHECK(g.failed == 0);
    CHECK(g.evaluated == g.passed + g.failed);
    if (g.evaluated > 0) CHECK(g.worst_headroom >= 0.0);
  }
}

TEST_CASE("summarize reports failures") {
  SpecVerification v;
  v.checks.push_back(check_le("variance_lower", 2.0, 1.0, 0.0));
  v.checks.push_back(check_le("variance_upper", 1.0, 2.0, 0.0));
  v.checks.push_back(skipped("est1", "reason"));
  const auto s = summarize({v});
  REQUIRE(s.size() == 3);
  std::map<std::string, GroupSummary> by;
  for (const auto& g : s) by[g.group] = g;
  CHECK(by.at("variance_lower").failed == 1);
  CHECK(by.at("variance_lower").worst_headroom == -1.0);
  CHECK(by.at("variance_upper").passed == 1);
  CHECK(by.at("est1").skipped == 1);
}

TEST_CASE("check_le semantics") {
  CHECK(check_le("a", 1.0, 1.0, 0.0).passed());
  CHECK(check_le("a", 1.0 + 1e-10, 1.0, 1e-9).passed());
  CHECK(check_le("a", 1.0 + 1e-8, 1.0, 1e-9).failed());
  CHECK(check_le("a", std::nan(""), 1.0, 1e-9).failed());
  CHECK(check_le("a", 1.0, 3.0, 0.0).margin == 2.0);
}

TEST_CASE("number formatting") {
  CHECK(csv_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(csv_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(csv_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(json_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(json_number(std::nan("")) == "nan");
  CHECK(json_number(2.5) == 2.5);
}

TEST_CASE("coefficient CSV") {
  const auto csv = to_csv(coefficient_report(fixtures::two_state(0.25, 4)));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,rho_k,rho1_pow_k,delta1,sqrt_delta1,delta1_pow_k");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("check CSV escapes names") {
  const auto csv = to_csv(std::vector<CheckOutcome>{check_le("a,b", 1.0, 2.0, 0.0)});
  CHECK(csv.find("\"a,b\"") != std::string::npos);
}
