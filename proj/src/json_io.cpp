#include "steinlab/json_io.hpp"

#include <stdexcept>
#include <string>

namespace steinlab {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw std::invalid_argument(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int require_int(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

bool is_exact_entry(const Json& v) { return v.is_number_integer() || v.is_string() || v.is_object(); }

std::vector<double> doubles_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const Json& v : j) {
    if (v.is_number())
      out.push_back(v.get<double>());
    else
      out.push_back(rational_from_json(v).to_double());
  }
  return out;
}

RationalMatrix rational_matrix_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  RationalMatrix m;
  for (const Json& row : j) m.push_back(rational_vector_from_json(row));
  return m;
}

}  // namespace

Json rational_to_json(const Rational& x) {
  return Json{{"num", x.numerator().get_str()}, {"den", x.denominator().get_str()}};
}

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return Rational(j.get<unsigned long long>());
    return Rational(j.get<long long>());
  }
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_object()) {
    const Json& num = require(j, "num");
    const Json& den = require(j, "den");
    const auto part = [](const Json& v) -> BigInt {
      if (v.is_number_integer()) return BigInt(std::to_string(v.get<long long>()));
      if (!v.is_string()) throw std::invalid_argument("rational parts must be decimal strings");
      const Rational r = Rational::parse(v.get<std::string>());
      if (!r.is_integer()) throw std::invalid_argument("rational parts must be integers");
      return r.numerator();
    };
    return Rational(part(num), part(den));
  }
  throw std::invalid_argument("expected an exact rational (integer, \"p/q\" or {num, den}), got " + j.dump());
}

Json rational_vector_to_json(const RationalVector& v) {
  Json out = Json::array();
  for (const Rational& x : v) out.push_back(rational_to_json(x));
  return out;
}

RationalVector rational_vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of rationals");
  RationalVector out;
  out.reserve(j.size());
  for (const Json& v : j) out.push_back(rational_from_json(v));
  return out;
}

Json polynomial_to_json(const SpherePolynomial& p) {
  Json terms = Json::array();
  for (const auto& [alpha, c] : p.terms()) {
    Json exps = Json::array();
    for (const auto& [var, e] : alpha.factors()) exps.push_back(Json::array({var, e}));
    terms.push_back(Json{{"exponents", exps}, {"coefficient", rational_to_json(c)}});
  }
  return Json{{"dimension", p.dimension()}, {"terms", terms}};
}

SpherePolynomial polynomial_from_json(const Json& j) {
  const int n = require_int(j, "dimension");
  SpherePolynomial p(n);
  const Json& terms = require(j, "terms");
  if (!terms.is_array()) throw std::invalid_argument("\"terms\" must be an array");
  for (const Json& t : terms) {
    std::vector<MultiIndex::Factor> factors;
    for (const Json& f : require(t, "exponents")) {
      if (!f.is_array() || f.size() != 2)
        throw std::invalid_argument("exponent entries must be [variable, exponent] pairs");
      factors.emplace_back(f[0].get<int>(), f[1].get<int>());
    }
    p.add_term(MultiIndex(n, std::move(factors)), rational_from_json(require(t, "coefficient")));
  }
  return p;
}

Json spec_to_json(const EigenfunctionSpec& spec) {
  if (const auto* q = std::get_if<QuadraticHarmonic>(&spec))
    return Json{{"family", "quadratic"}, {"n", q->n}, {"d", rational_vector_to_json(q->d)}};
  if (const auto* g = std::get_if<GegenbauerCombo>(&spec)) {
    Json j{{"family", "gegenbauer"}, {"n", g->n}, {"ell", g->ell}};
    j["a"] = g->a_exact ? rational_vector_to_json(*g->a_exact) : Json(g->a);
    return j;
  }
  const auto& t = std::get<TorusCombo>(spec);
  Json b = Json::array();
  for (const auto& row : t.metric->exact()) b.push_back(rational_vector_to_json(row));
  Json v = Json::array();
  for (const auto& f : t.frequencies) v.push_back(rational_vector_to_json(f.v));
  return Json{{"family", "torus"}, {"n", t.n()}, {"B", b}, {"V", v}, {"a", t.a}};
}

EigenfunctionSpec spec_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("spec must be a JSON object");
  const Json& fam = require(j, "family");
  if (!fam.is_string()) throw std::invalid_argument("\"family\" must be a string");
  const std::string family = fam.get<std::string>();
  if (family == "quadratic") {
    if (j.contains("d")) {
      QuadraticHarmonic q = make_quadratic(rational_vector_from_json(j.at("d")));
      if (j.contains("n") && require_int(j, "n") != q.n)
        throw std::invalid_argument("\"n\" disagrees with the length of \"d\"");
      return q;
    }
    const Json& m = require(j, "matrix");
    if (!m.is_array() || m.empty()) throw std::invalid_argument("\"matrix\" must be a non-empty array");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
    for (std::size_t r = 0; r < m.size(); ++r) {
      const auto row = doubles_from_json(m[r], "matrix row");
      if (row.size() != m.size()) throw std::invalid_argument("\"matrix\" must be square");
      for (std::size_t c = 0; c < row.size(); ++c)
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return make_quadratic_from_matrix(a);
  }
  if (family == "gegenbauer") {
    const int n = require_int(j, "n");
    const int ell = require_int(j, "ell");
    const Json& a = require(j, "a");
    if (!a.is_array()) throw std::invalid_argument("\"a\" must be an array");
    bool exact = !a.empty();
    for (const Json& v : a) exact = exact && is_exact_entry(v);
    if (exact) return make_gegenbauer(n, ell, rational_vector_from_json(a));
    return make_gegenbauer(n, ell, doubles_from_json(a, "\"a\""));
  }
  if (family == "torus") {
    RationalMatrix b;
    if (j.contains("B")) {
      b = rational_matrix_from_json(j.at("B"));
      if (j.contains("n") && require_int(j, "n") != static_cast<int>(b.size()))
        throw std::invalid_argument("\"n\" disagrees with the size of \"B\"");
    } else {
      const int n = require_int(j, "n");
      if (n < 1) throw std::invalid_argument("\"n\" must be positive");
      b.assign(static_cast<std::size_t>(n), RationalVector(static_cast<std::size_t>(n)));
      for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    }
    const Json& v = require(j, "V");
    if (!v.is_array()) throw std::invalid_argument("\"V\" must be an array of vectors");
    std::vector<RationalVector> freqs;
    for (const Json& row : v) freqs.push_back(rational_vector_from_json(row));
    return make_torus(std::move(b), std::move(freqs), doubles_from_json(require(j, "a"), "\"a\""));
  }
  throw std::invalid_argument("unknown family \"" + family + "\" (expected quadratic, gegenbauer or torus)");
}

}  // namespace steinlab
