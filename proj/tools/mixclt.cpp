// mixclt: command-line front end.
//
// Exit codes: 0 all checks passed, 1 a numerical check failed, 2 usage or
// input error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "mixclt/chain_model.hpp"
#include "mixclt/clt_harness.hpp"
#include "mixclt/coefficients.hpp"
#include "mixclt/corpus.hpp"
#include "mixclt/error.hpp"
#include "mixclt/families.hpp"
#include "mixclt/moments.hpp"
#include "mixclt/report.hpp"
#include "mixclt/spec_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mixclt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

constexpr std::uint64_t kSelftestSeed = 20240917;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string spec_path;
  std::string family;
  std::optional<double> c;
  std::vector<std::size_t> n;
  std::size_t replicates = 20000;
  std::uint64_t seed = 42;
  std::vector<double> eps{1.0, 0.1, 0.01};
  std::vector<double> p{2.0, 2.5, 3.0, 4.0};
  std::vector<std::string> checks{"all"};
  std::vector<std::string> out{"json"};
  std::string out_dir;
  int threads = 0;
  double tol_rel = 1e-9;
};

// Writes to out_dir/name when an output directory is configured, stdout otherwise.
class Sink {
 public:
  explicit Sink(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) {
      if (const char* env = std::getenv("MIXCLT_OUT_DIR"); env != nullptr) dir_ = env;
    }
    if (!dir_.empty()) {
      std::error_code ec;
      fs::create_directories(dir_, ec);
      if (ec) throw UsageError("cannot create output directory '" + dir_ + "': " + ec.message());
    }
  }

  void write(const std::string& name, const std::string& content) const {
    if (dir_.empty()) {
      std::cout << content;
      if (!content.empty() && content.back() != '\n') std::cout << '\n';
      return;
    }
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
  }

 private:
  std::string dir_;
};

bool wants(const RunConfig& cfg, const std::string& format) {
  for (const auto& f : cfg.out)
    if (f == format) return true;
  return false;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// Prepends an `n` column to a CSV body.
std::string with_n_column(const std::string& csv, std::size_t n, bool header) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (header) out << "n," << line << '\n';
      continue;
    }
    out << n << ',' << line << '\n';
  }
  return out.str();
}

struct Row {
  std::string source;
  ChainSpec spec;
};

// The rows a spec-consuming subcommand works on: one spec file, or a finite
// family at each --n.
std::vector<Row> load_rows(const RunConfig& cfg) {
  if (cfg.spec_path.empty() == cfg.family.empty()) throw UsageError("give exactly one of --spec or --family");
  std::vector<Row> rows;
  if (!cfg.spec_path.empty()) {
    if (!cfg.n.empty()) throw UsageError("--n applies to --family only");
    ChainSpec spec = validate(load_chain_spec(cfg.spec_path), true);
    rows.push_back({cfg.spec_path, std::move(spec)});
    return rows;
  }
  const TriangularFamily fam = parse_family(cfg.family, cfg.c);
  if (!fam.finite()) throw UsageError("family '" + cfg.family + "' has no finite rows; use the clt subcommand");
  if (cfg.n.empty()) throw UsageError("--family needs --n");
  for (std::size_t n : cfg.n) rows.push_back({fam.descriptor, fam.make_row(n)});
  return rows;
}

json source_json(const RunConfig& cfg) {
  return cfg.spec_path.empty() ? json{{"family", cfg.family}} : json{{"spec", cfg.spec_path}};
}

int run_coeffs(const RunConfig& cfg) {
  const Sink sink(cfg.out_dir);
  json results = json::array();
  std::string csv;
  bool failed = false;
  for (const auto& row : load_rows(cfg)) {
    const CoefficientReport rep = coefficient_report(row.spec);
    failed = failed || any_failed(rep.checks);
    results.push_back(to_json(rep));
    csv += with_n_column(to_csv(rep), row.spec.n, csv.empty());
  }
  if (wants(cfg, "json")) sink.write("coeffs.json", dump({{"source", source_json(cfg)}, {"results", results}}));
  if (wants(cfg, "csv")) sink.write("coeffs.csv", csv);
  return failed ? kExitCheckFailed : kExitOk;
}

int run_variance(const RunConfig& cfg) {
  const Sink sink(cfg.out_dir);
  json results = json::array();
  std::string csv;
  bool failed = false;
  for (const auto& row : load_rows(cfg)) {
    const MomentReport rep = moment_report(analyze(row.spec), cfg.p, cfg.tol_rel);
    failed = failed || any_failed(rep.bound_checks);
    json item = to_json(rep);
    item["n"] = row.spec.n;
    results.push_back(item);
    csv += with_n_column(to_csv(rep.bound_checks), row.spec.n, csv.empty());
  }
  if (wants(cfg, "json")) sink.write("variance.json", dump({{"source", source_json(cfg)}, {"results", results}}));
  if (wants(cfg, "csv")) sink.write("variance.csv", csv);
  return failed ? kExitCheckFailed : kExitOk;
}

VerifyOptions verify_options(const RunConfig& cfg) {
  VerifyOptions opt;
  opt.p_orders = cfg.p;
  opt.rel = cfg.tol_rel;
  bool all = false;
  std::set<std::string> groups;
  for (const auto& c : cfg.checks) {
    if (c == "all") {
      all = true;
      continue;
    }
    bool known = false;
    for (const auto& g : check_groups()) known = known || g == c;
    if (!known) {
      std::string list;
      for (const auto& g : check_groups()) list += (list.empty() ? "" : ",") + g;
      throw UsageError("unknown check group '" + c + "' (known: " + list + ",all)");
    }
    groups.insert(c);
  }
  if (!all) opt.groups = groups;
  return opt;
}

json verification_document(const std::vector<SpecVerification>& results, const std::vector<GroupSummary>& summary) {
  json specs = json::array();
  for (const auto& v : results) specs.push_back(to_json(v));
  json groups = json::array();
  bool failed = false;
  for (const auto& g : summary) {
    groups.push_back(to_json(g));
    failed = failed || g.failed > 0;
  }
  return {{"passed", !failed}, {"summary", groups}, {"results", specs}};
}

int run_verify(const RunConfig& cfg) {
  const Sink sink(cfg.out_dir);
  const VerifyOptions opt = verify_options(cfg);
  std::vector<ChainSpec> corpus;
  for (auto& row : load_rows(cfg)) corpus.push_back(std::move(row.spec));
  const auto results = verify_corpus(corpus, opt);
  const auto summary = summarize(results);
  json doc = verification_document(results, summary);
  doc["source"] = source_json(cfg);
  doc["tol_rel"] = cfg.tol_rel;
  if (wants(cfg, "json")) sink.write("verify.json", dump(doc));
  if (wants(cfg, "csv")) {
    std::string csv;
    for (const auto& v : results) csv += with_n_column(to_csv(v.checks), v.n, csv.empty());
    sink.write("verify.csv", csv);
  }
  return doc["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

int run_clt(const RunConfig& cfg) {
  if (cfg.family.empty()) throw UsageError("clt needs --family");
  if (!cfg.spec_path.empty()) throw UsageError("clt takes --family, not --spec");
  if (cfg.n.empty()) throw UsageError("clt needs --n");
  const Sink sink(cfg.out_dir);
  const TriangularFamily fam = parse_family(cfg.family, cfg.c);
  const ExperimentResult result = run_experiment(fam, cfg.n, cfg.replicates, cfg.seed, cfg.eps);
  if (wants(cfg, "json")) sink.write("clt.json", dump(to_json(result)));
  if (wants(cfg, "csv")) sink.write("clt.csv", to_csv(result));
  if (wants(cfg, "plot")) {
    sink.write("clt_ks.dat", ks_plot_data(result));
    for (const auto& t : result.traces) {
      std::string name = t.name;
      for (char& ch : name)
        if (ch == '[' || ch == ']' || ch == '=') ch = '_';
      sink.write("clt_" + name + ".dat", condition_plot_data(result, t.name));
    }
  }
  for (const auto& row : result.rows) {
    if (!row.error.empty()) {
      std::cerr << "mixclt: n = " << row.n << ": " << row.error << "\n";
      return kExitUsage;
    }
  }
  return kExitOk;
}

json metadata_json(const AnalyticMetadata& meta) {
  json out = json::object();
  if (meta.rho1) out["rho1"] = json_number(*meta.rho1);
  if (meta.lambda) out["lambda"] = json_number(*meta.lambda);
  if (meta.delta1) out["delta1"] = json_number(*meta.delta1);
  if (meta.sigma2) out["sigma2"] = json_number(*meta.sigma2);
  return out;
}

int run_family(const RunConfig& cfg) {
  const Sink sink(cfg.out_dir);
  if (cfg.family.empty()) {
    json list = json::array();
    std::ostringstream text;
    for (const auto& info : builtin_families()) {
      list.push_back({{"name", info.name}, {"usage", info.usage}, {"description", info.description}});
      text << info.usage << "\n    " << info.description << "\n";
    }
    if (wants(cfg, "json")) {
      sink.write("families.json", dump(list));
    } else {
      sink.write("families.txt", text.str());
    }
    return kExitOk;
  }
  const TriangularFamily fam = parse_family(cfg.family, cfg.c);
  json doc{{"name", fam.name}, {"descriptor", fam.descriptor}, {"description", fam.description},
           {"finite", fam.finite()}};
  json rows = json::array();
  for (std::size_t n : cfg.n) {
    json row{{"n", n}, {"analytic", metadata_json(fam.analytic(n))}};
    if (fam.finite()) {
      const ChainAnalysis a = analyze(fam.make_row(n));
      row["computed"] = {{"rho1", json_number(a.coefficients.rho1)},
                         {"lambda", json_number(a.coefficients.lambda)},
                         {"delta1", json_number(a.coefficients.delta1)},
                         {"sigma2", json_number(a.sigma2)}};
    }
    rows.push_back(row);
  }
  doc["rows"] = rows;
  sink.write("family.json", dump(doc));
  return kExitOk;
}

int run_selftest(const RunConfig& cfg, bool seed_given) {
  const Sink sink(cfg.out_dir);
  const std::uint64_t master = seed_given ? cfg.seed : kSelftestSeed;
  const VerifyOptions opt = verify_options(cfg);
  // Full-range corpus, the small corpus on which every exponential check is
  // enumerable, and the built-in families.
  std::vector<ChainSpec> corpus = random_corpus(master, 1000, 4, 12);
  const auto small = random_corpus(master + 1, 500, 3, 10);
  const auto fams = family_corpus();
  corpus.insert(corpus.end(), small.begin(), small.end());
  corpus.insert(corpus.end(), fams.begin(), fams.end());

  const auto results = verify_corpus(corpus, opt);
  const auto summary = summarize(results);
  json doc = verification_document(results, summary);
  doc.erase("results");
  json failures = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto& c : results[i].checks) {
      if (c.failed()) failures.push_back({{"index", i}, {"spec", results[i].name}, {"check", to_json(c)}});
    }
  }
  doc["failures"] = failures;
  doc["master_seed"] = master;
  doc["corpus"] = {{"random_m4_n12", 1000}, {"random_m3_n10", 500}, {"families", fams.size()}};
  doc["tol_rel"] = cfg.tol_rel;

  if (wants(cfg, "json")) sink.write("selftest.json", dump(doc));
  if (wants(cfg, "csv")) sink.write("selftest.csv", to_csv(summary));
  for (const auto& g : summary) {
    std::cerr << (g.failed ? "FAIL " : "ok   ") << g.group << ": " << g.passed << " passed, " << g.failed
              << " failed, " << g.skipped << " skipped\n";
  }
  return doc["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
}

void apply_threads(int threads) {
  if (threads < 0) throw UsageError("--threads must be positive");
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

void check_config(const RunConfig& cfg) {
  if (cfg.replicates < 1) throw UsageError("--replicates must be at least 1");
  for (std::size_t i = 1; i < cfg.n.size(); ++i) {
    if (cfg.n[i] <= cfg.n[i - 1]) throw UsageError("--n must be strictly increasing");
  }
  for (std::size_t n : cfg.n)
    if (n < 1) throw UsageError("--n entries must be at least 1");
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw UsageError("--eps entries must be positive");
  for (const auto& f : cfg.out) {
    if (f != "json" && f != "csv" && f != "plot") throw UsageError("--out must be json, csv or plot");
  }
  if (!(cfg.tol_rel >= 0.0)) throw UsageError("--tol-rel must be non-negative");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixing coefficients, variance bounds and CLT experiments for finite Markov chain arrays"};
  app.require_subcommand(1);
  RunConfig cfg;
  double c_value = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec_path, "Chain-spec JSON file");
    sub->add_option("--family", cfg.family, "Family descriptor NAME:PARAMS");
    sub->add_option("--c", c_value, "Value bound to the symbol c in a rate expression");
    sub->add_option("--n", cfg.n, "Row lengths, comma separated")->delimiter(',');
    sub->add_option("--p", cfg.p, "Moment orders, comma separated")->delimiter(',');
    sub->add_option("--out", cfg.out, "Output formats: json, csv, plot")->delimiter(',');
    sub->add_option("--out-dir", cfg.out_dir, "Output directory (default: MIXCLT_OUT_DIR, else stdout)");
    sub->add_option("--threads", cfg.threads, "Worker threads (default: available parallelism)");
    sub->add_option("--tol-rel", cfg.tol_rel, "Relative slack for inequality checks");
  };

  auto* coeffs = app.add_subcommand("coeffs", "Maximal-correlation and contraction coefficients");
  add_common(coeffs);
  auto* variance = app.add_subcommand("variance", "Exact variance, tail conditionals and bound checks");
  add_common(variance);
  auto* verify = app.add_subcommand("verify", "Full inequality and identity suite");
  add_common(verify);
  verify->add_option("--checks", cfg.checks, "Check groups or 'all'")->delimiter(',');
  auto* clt = app.add_subcommand("clt", "Monte-Carlo CLT experiment over an n grid");
  add_common(clt);
  clt->add_option("--replicates", cfg.replicates, "Monte-Carlo replicates per n");
  clt->add_option("--seed", cfg.seed, "Master seed");
  clt->add_option("--eps", cfg.eps, "Lindeberg eps sweep")->delimiter(',');
  auto* family = app.add_subcommand("family", "List or describe built-in families");
  add_common(family);
  auto* selftest = app.add_subcommand("selftest", "Randomized verification corpus with a pinned seed");
  add_common(selftest);
  auto* seed_self = selftest->add_option("--seed", cfg.seed, "Master seed (default pinned)");
  selftest->add_option("--checks", cfg.checks, "Check groups or 'all'")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mixclt: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    for (auto* sub : {coeffs, variance, verify, clt, family, selftest}) {
      if (sub->parsed() && sub->count("--c") > 0) cfg.c = c_value;
    }
    check_config(cfg);
    apply_threads(cfg.threads);
    if (coeffs->parsed()) return run_coeffs(cfg);
    if (variance->parsed()) return run_variance(cfg);
    if (verify->parsed()) return run_verify(cfg);
    if (clt->parsed()) return run_clt(cfg);
    if (family->parsed()) return run_family(cfg);
    if (selftest->parsed()) return run_selftest(cfg, seed_self->count() > 0);
  } catch (const UsageError& e) {
    std::cerr << "mixclt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "mixclt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "mixclt: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
