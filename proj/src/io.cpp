#include "shapecert/io.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace shapecert::io {

namespace {

constexpr const char* kVersion = "0.1.0";

Json polynomial_to_json(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [m, c] : p.terms()) {
    auto pair = rational_to_int64_pair(c);
    if (!pair)
      throw ParseError("coefficient " + rational_to_string(c) +
                       " does not fit the int64 num/den schema");
    Json t;
    t["exps"] = m.exponents();
    t["num"] = pair->first;
    t["den"] = pair->second;
    terms.push_back(std::move(t));
  }
  Json j;
  j["terms"] = std::move(terms);
  return j;
}

Polynomial polynomial_from_json(const Json& j, std::size_t nvars) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ParseError("polynomial: expected object with a 'terms' array");
  Polynomial p(nvars);
  for (const auto& t : j["terms"]) {
    if (!t.contains("exps") || !t["exps"].is_array())
      throw ParseError("polynomial term: missing 'exps' array");
    Monomial m(nvars);
    if (t["exps"].size() != nvars)
      throw ParseError("polynomial term: exps length " + std::to_string(t["exps"].size()) +
                       " != nvars " + std::to_string(nvars));
    for (std::size_t i = 0; i < nvars; ++i) {
      const auto& e = t["exps"][i];
      if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
        throw ParseError("polynomial term: exponents must be non-negative integers");
      m.set_exp(i, static_cast<std::uint32_t>(e.get<std::int64_t>()));
    }
    if (!t.contains("num") || !t.contains("den") || !t["num"].is_number_integer() ||
        !t["den"].is_number_integer())
      throw ParseError("polynomial term: 'num' and 'den' must be integers");
    const std::int64_t num = t["num"].get<std::int64_t>();
    const std::int64_t den = t["den"].get<std::int64_t>();
    if (den == 0) throw ParseError("polynomial term: zero denominator");
    p.add_term(m, Rational(num, den));
  }
  return p;
}

// string rationals for certificate payloads (arbitrary precision)
Json polynomial_to_json_exact(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [m, c] : p.terms()) {
    Json t;
    t["exps"] = m.exponents();
    t["coeff"] = rational_to_string(c);
    terms.push_back(std::move(t));
  }
  Json j;
  j["terms"] = std::move(terms);
  return j;
}

Polynomial polynomial_from_json_exact(const Json& j, std::size_t nvars) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ParseError("polynomial: expected object with a 'terms' array");
  Polynomial p(nvars);
  for (const auto& t : j["terms"]) {
    Monomial m(nvars);
    if (!t.contains("exps") || t["exps"].size() != nvars)
      throw ParseError("polynomial term: bad exps");
    for (std::size_t i = 0; i < nvars; ++i)
      m.set_exp(i, t["exps"][i].get<std::uint32_t>());
    if (!t.contains("coeff") || !t["coeff"].is_string())
      throw ParseError("polynomial term: 'coeff' must be a rational string");
    p.add_term(m, rational_from_string(t["coeff"].get<std::string>()));
  }
  return p;
}

std::vector<Polynomial> list_from_json(const Json& j, const char* key, std::size_t nvars) {
  std::vector<Polynomial> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  for (const auto& pj : j[key]) out.push_back(polynomial_from_json(pj, nvars));
  return out;
}

}  // namespace

SemialgebraicSet ProblemFile::to_set() const {
  SemialgebraicSet set;
  set.nvars = nvars;
  set.f_list = f;
  set.g_list = g;
  set.h_list = h;
  set.validate();
  return set;
}

ProblemFile ProblemFile::from_set(const SemialgebraicSet& set, std::vector<std::string> names) {
  ProblemFile p;
  p.nvars = set.nvars;
  if (names.empty())
    for (std::size_t i = 0; i < set.nvars; ++i) names.push_back("x" + std::to_string(i));
  p.var_names = std::move(names);
  p.f = set.f_list;
  p.g = set.g_list;
  p.h = set.h_list;
  return p;
}

Json problem_to_json(const ProblemFile& p) {
  Json j;
  j["nvars"] = p.nvars;
  j["var_names"] = p.var_names;
  j["f"] = Json::array();
  j["g"] = Json::array();
  j["h"] = Json::array();
  for (const auto& q : p.f) j["f"].push_back(polynomial_to_json(q));
  for (const auto& q : p.g) j["g"].push_back(polynomial_to_json(q));
  for (const auto& q : p.h) j["h"].push_back(polynomial_to_json(q));
  return j;
}

ProblemFile problem_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("problem file: top level must be an object");
  if (!j.contains("nvars") || !j["nvars"].is_number_integer() || j["nvars"].get<std::int64_t>() < 0)
    throw ParseError("problem file: 'nvars' must be a non-negative integer");
  ProblemFile p;
  p.nvars = j["nvars"].get<std::size_t>();
  if (j.contains("var_names")) {
    if (!j["var_names"].is_array())
      throw ParseError("problem file: 'var_names' must be an array of strings");
    for (const auto& s : j["var_names"]) {
      if (!s.is_string()) throw ParseError("problem file: 'var_names' must be strings");
      p.var_names.push_back(s.get<std::string>());
    }
    if (!p.var_names.empty() && p.var_names.size() != p.nvars)
      throw ParseError("problem file: var_names length != nvars");
  }
  if (p.var_names.empty())
    for (std::size_t i = 0; i < p.nvars; ++i) p.var_names.push_back("x" + std::to_string(i));
  p.f = list_from_json(j, "f", p.nvars);
  p.g = list_from_json(j, "g", p.nvars);
  p.h = list_from_json(j, "h", p.nvars);
  return p;
}

void write_problem(const ProblemFile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << problem_to_json(p).dump(2) << "\n";
}

ProblemFile read_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);
  Json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return problem_from_json(j);
}

std::string problem_hash(const ProblemFile& p) {
  const std::string canon = problem_to_json(p).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << h;
  return os.str();
}

Json certificate_to_json(const Refutation& r, std::size_t nvars, const std::string& input_hash) {
  Json j;
  j["version"] = kVersion;
  j["input_hash"] = input_hash;
  j["nvars"] = nvars;
  j["monoid_power"] = r.monoid_power;
  j["identity_residual"] = r.identity_residual;
  Json cones = Json::array();
  for (const auto& term : r.cone_terms) {
    Json c;
    c["subset"] = term.subset;
    Json basis = Json::array();
    for (const auto& m : term.gram.z) basis.push_back(m.exponents());
    c["basis"] = std::move(basis);
    Json gram = Json::array();
    for (const auto& row : term.gram.q_rational) {
      Json jr = Json::array();
      for (const auto& v : row) jr.push_back(rational_to_string(v));
      gram.push_back(std::move(jr));
    }
    c["gram"] = std::move(gram);
    c["rounded_rational"] = term.gram.rounded_rational;
    cones.push_back(std::move(c));
  }
  j["cone_terms"] = std::move(cones);
  Json ideals = Json::array();
  for (const auto& q : r.ideal_multipliers) ideals.push_back(polynomial_to_json_exact(q));
  j["ideal_multipliers"] = std::move(ideals);
  return j;
}

Refutation certificate_from_json(const Json& j, std::size_t nvars) {
  if (!j.is_object()) throw ParseError("certificate: top level must be an object");
  Refutation r;
  if (!j.contains("monoid_power") || !j["monoid_power"].is_number_integer())
    throw ParseError("certificate: missing integer 'monoid_power'");
  r.monoid_power = j["monoid_power"].get<int>();
  if (j.contains("identity_residual")) r.identity_residual = j["identity_residual"].get<double>();
  if (!j.contains("cone_terms") || !j["cone_terms"].is_array())
    throw ParseError("certificate: missing 'cone_terms' array");
  for (const auto& c : j["cone_terms"]) {
    ConeTerm term;
    if (!c.contains("subset") || !c["subset"].is_array())
      throw ParseError("certificate cone term: missing 'subset'");
    for (const auto& idx : c["subset"]) term.subset.push_back(idx.get<int>());
    if (!c.contains("basis") || !c["basis"].is_array())
      throw ParseError("certificate cone term: missing 'basis'");
    for (const auto& mono : c["basis"]) {
      Monomial m(nvars);
      if (mono.size() != nvars) throw ParseError("certificate basis monomial has wrong length");
      for (std::size_t i = 0; i < nvars; ++i) m.set_exp(i, mono[i].get<std::uint32_t>());
      term.gram.z.push_back(std::move(m));
    }
    if (!c.contains("gram") || !c["gram"].is_array() || c["gram"].size() != term.gram.z.size())
      throw ParseError("certificate cone term: gram size does not match basis");
    const std::size_t n = term.gram.z.size();
    term.gram.q_rational.assign(n, std::vector<Rational>(n));
    term.gram.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      if (c["gram"][a].size() != n) throw ParseError("certificate gram row has wrong length");
      for (std::size_t b = 0; b < n; ++b) {
        const Rational v = rational_from_string(c["gram"][a][b].get<std::string>());
        term.gram.q_rational[a][b] = v;
        term.gram.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = to_double(v);
      }
    }
    if (c.contains("rounded_rational")) term.gram.rounded_rational = c["rounded_rational"].get<bool>();
    term.multiplier = gram_form(term.gram.q_rational, term.gram.z, nvars);
    r.cone_terms.push_back(std::move(term));
  }
  if (!j.contains("ideal_multipliers") || !j["ideal_multipliers"].is_array())
    throw ParseError("certificate: missing 'ideal_multipliers'");
  for (const auto& q : j["ideal_multipliers"])
    r.ideal_multipliers.push_back(polynomial_from_json_exact(q, nvars));
  return r;
}

void write_certificate(const Refutation& r, std::size_t nvars, const std::string& input_hash,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << certificate_to_json(r, nvars, input_hash).dump(2) << "\n";
}

std::pair<Refutation, std::string> read_certificate(const std::string& path, std::size_t nvars) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);
  Json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  std::string hash = j.contains("input_hash") ? j["input_hash"].get<std::string>() : "";
  return {certificate_from_json(j, nvars), hash};
}

void write_trajectory_csv(const SimulationResult& sim, const FormationSpec& spec,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "time";
  const char* axis = "xyzw";
  for (int i = 0; i < spec.n; ++i)
    for (int c = 0; c < spec.dim; ++c) os << ",p" << (i + 1) << axis[c];
  os << ",err_norm,potential\n";
  os.precision(17);
  for (const auto& s : sim.trajectory) {
    os << s.t;
    for (Eigen::Index k = 0; k < s.p.size(); ++k) os << "," << s.p[k];
    os << "," << s.err_norm << "," << s.phi << "\n";
  }
}

Json equilibrium_report_to_json(const EquilibriumReport& rep) {
  Json j;
  j["p"] = std::vector<double>(rep.p.data(), rep.p.data() + rep.p.size());
  j["rhs_norm"] = rep.rhs_norm;
  j["error_norm"] = rep.error_norm;
  j["hessian_eigs"] = rep.hessian_eigs;
  j["classification"] = rep.classification;
  return j;
}

// --- polynomial text parser ----------------------------------------------

namespace {

struct Lexer {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& var_names) {
  const std::size_t nvars = var_names.size();
  Lexer lex{text};

  auto parse_integer = [&]() -> BigInt {
    lex.skip_ws();
    std::size_t start = lex.pos;
    while (lex.pos < lex.s.size() && std::isdigit(static_cast<unsigned char>(lex.s[lex.pos])))
      ++lex.pos;
    if (lex.pos == start) throw ParseError("expected number at position " + std::to_string(start));
    return BigInt(lex.s.substr(start, lex.pos - start));
  };

  auto parse_name = [&]() -> int {
    lex.skip_ws();
    std::size_t start = lex.pos;
    while (lex.pos < lex.s.size() &&
           (std::isalnum(static_cast<unsigned char>(lex.s[lex.pos])) || lex.s[lex.pos] == '_'))
      ++lex.pos;
    const std::string name = lex.s.substr(start, lex.pos - start);
    for (std::size_t i = 0; i < var_names.size(); ++i)
      if (var_names[i] == name) return static_cast<int>(i);
    throw ParseError("unknown variable '" + name + "'");
  };

  Polynomial result(nvars);
  bool first = true;
  while (!lex.eof()) {
    int sign = 1;
    if (lex.accept('+')) {
      sign = 1;
    } else if (lex.accept('-')) {
      sign = -1;
    } else if (!first) {
      throw ParseError("expected '+' or '-' between terms");
    }
    first = false;

    Rational coeff(sign);
    Monomial mono(nvars);
    bool saw_factor = false;
    while (true) {
      const char c = lex.peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        BigInt num = parse_integer();
        BigInt den = 1;
        if (lex.accept('/')) den = parse_integer();
        if (den == 0) throw ParseError("zero denominator in coefficient");
        coeff *= Rational(num, den);
        saw_factor = true;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const int var = parse_name();
        std::uint32_t e = 1;
        if (lex.accept('^')) e = static_cast<std::uint32_t>(parse_integer().convert_to<unsigned>());
        mono.set_exp(static_cast<std::size_t>(var), mono.exp(static_cast<std::size_t>(var)) + e);
        saw_factor = true;
      } else {
        break;
      }
      if (!lex.accept('*')) break;
    }
    if (!saw_factor) throw ParseError("empty term in polynomial text");
    result.add_term(mono, coeff);
  }
  return result;
}

std::string version_string() { return kVersion; }

}  // namespace shapecert::io
