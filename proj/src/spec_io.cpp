#include "mixclt/spec_io.hpp"

#include <cmath>
#include <fstream>

#include "mixclt/error.hpp"

namespace mixclt {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& field, const std::string& reason) {
  throw Error(ErrorKind::ParseError, source + ": field '" + field + "': " + reason);
}

double number_at(const nlohmann::json& v, const std::string& source, const std::string& field) {
  if (!v.is_number()) fail(source, field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(source, field, "number is not finite");
  return x;
}

Eigen::VectorXd vector_at(const nlohmann::json& v, std::size_t len, const std::string& source,
                          const std::string& field) {
  if (!v.is_array()) fail(source, field, "expected an array");
  if (v.size() != len) {
    fail(source, field, "expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < len; ++i) {
    out[static_cast<Eigen::Index>(i)] = number_at(v[i], source, field + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::size_t positive_int_at(const nlohmann::json& doc, const char* key, const std::string& source) {
  if (!doc.contains(key)) fail(source, key, "missing");
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) fail(source, key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < 1) fail(source, key, "must be at least 1");
  return static_cast<std::size_t>(x);
}

}  // namespace

ChainSpec chain_spec_from_json(const nlohmann::json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "<root>", "expected an object");
  ChainSpec spec;
  spec.m = positive_int_at(doc, "m", source);
  spec.n = positive_int_at(doc, "n", source);

  if (!doc.contains("initial")) fail(source, "initial", "missing");
  spec.initial = vector_at(doc.at("initial"), spec.m, source, "initial");

  if (!doc.contains("transitions")) fail(source, "transitions", "missing");
  const auto& trans = doc.at("transitions");
  if (!trans.is_array()) fail(source, "transitions", "expected an array");
  if (trans.size() != spec.n - 1) {
    fail(source, "transitions",
         "expected " + std::to_string(spec.n - 1) + " matrices, got " + std::to_string(trans.size()));
  }
  for (std::size_t i = 0; i < trans.size(); ++i) {
    const std::string field = "transitions[" + std::to_string(i) + "]";
    const auto& mat = trans[i];
    if (!mat.is_array() || mat.size() != spec.m) {
      fail(source, field, "expected " + std::to_string(spec.m) + " rows");
    }
    Eigen::MatrixXd q(spec.m, spec.m);
    for (std::size_t x = 0; x < spec.m; ++x) {
      q.row(static_cast<Eigen::Index>(x)) =
          vector_at(mat[x], spec.m, source, field + "[" + std::to_string(x) + "]").transpose();
    }
    spec.transitions.push_back(std::move(q));
  }

  if (!doc.contains("f")) fail(source, "f", "missing");
  const auto& fs = doc.at("f");
  if (!fs.is_array()) fail(source, "f", "expected an array");
  if (fs.size() != spec.n) {
    fail(source, "f", "expected " + std::to_string(spec.n) + " functions, got " + std::to_string(fs.size()));
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    spec.f.push_back(vector_at(fs[i], spec.m, source, "f[" + std::to_string(i) + "]"));
  }

  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) fail(source, "name", "expected a string");
    spec.name = doc.at("name").get<std::string>();
  }
  return spec;
}

ChainSpec load_chain_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, path.string() + ": cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return chain_spec_from_json(doc, path.string());
}

nlohmann::json chain_spec_to_json(const ChainSpec& spec) {
  nlohmann::json doc;
  doc["m"] = spec.m;
  doc["n"] = spec.n;
  doc["initial"] = std::vector<double>(spec.initial.data(), spec.initial.data() + spec.initial.size());
  nlohmann::json trans = nlohmann::json::array();
  for (const auto& q : spec.transitions) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index x = 0; x < q.rows(); ++x) {
      std::vector<double> row(static_cast<std::size_t>(q.cols()));
      for (Eigen::Index y = 0; y < q.cols(); ++y) row[static_cast<std::size_t>(y)] = q(x, y);
      rows.push_back(row);
    }
    trans.push_back(rows);
  }
  doc["transitions"] = trans;
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& fi : spec.f) fs.push_back(std::vector<double>(fi.data(), fi.data() + fi.size()));
  doc["f"] = fs;
  if (!spec.name.empty()) doc["name"] = spec.name;
  return doc;
}

}  // namespace mixclt
