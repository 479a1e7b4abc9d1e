#include "shapecert/sos.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace shapecert {

namespace {

PolynomialTemplate template_of(const Polynomial& p) {
  PolynomialTemplate t;
  for (const auto& [m, c] : p.terms()) t.emplace(m, LinExpr::of_constant(c));
  return t;
}

std::size_t template_nvars(const PolynomialTemplate& t) {
  if (t.empty()) throw std::invalid_argument("empty polynomial template");
  return t.begin()->first.nvars();
}

int template_degree(const PolynomialTemplate& t) {
  int d = -1;
  for (const auto& [m, e] : t) {
    (void)e;
    d = std::max(d, m.degree());
  }
  return d;
}

bool template_homogeneous(const PolynomialTemplate& t, int degree) {
  for (const auto& [m, e] : t) {
    (void)e;
    if (m.degree() != degree) return false;
  }
  return true;
}

// map from product monomial to the Gram entries producing it
std::map<Monomial, std::vector<MatchingConstraint::GramTerm>, GradedLexLess> pairing_table(
    const MonomialVector& z) {
  std::map<Monomial, std::vector<MatchingConstraint::GramTerm>, GradedLexLess> table;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i; j < z.size(); ++j)
      table[z[i] * z[j]].push_back(
          {static_cast<int>(i), static_cast<int>(j), i == j ? 1 : 2});
  return table;
}

std::vector<std::vector<Rational>> dyadic_matrix(const Eigen::MatrixXd& q) {
  std::vector<std::vector<Rational>> out(static_cast<std::size_t>(q.rows()),
                                         std::vector<Rational>(static_cast<std::size_t>(q.cols())));
  for (Eigen::Index r = 0; r < q.rows(); ++r)
    for (Eigen::Index c = 0; c < q.cols(); ++c)
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          rational_from_double(q(r, c));
  return out;
}

std::optional<std::vector<std::vector<Rational>>> rounded_matrix(const Eigen::MatrixXd& q,
                                                                 std::uint64_t den_cap) {
  std::vector<std::vector<Rational>> out(static_cast<std::size_t>(q.rows()),
                                         std::vector<Rational>(static_cast<std::size_t>(q.cols())));
  for (Eigen::Index r = 0; r < q.rows(); ++r)
    for (Eigen::Index c = r; c < q.cols(); ++c) {
      auto v = round_to_rational(0.5 * (q(r, c) + q(c, r)), den_cap);
      if (!v) return std::nullopt;
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = *v;
      out[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] = *v;
    }
  return out;
}

}  // namespace

Polynomial gram_form(const std::vector<std::vector<Rational>>& q, const MonomialVector& z,
                     std::size_t nvars) {
  Polynomial acc(nvars);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i; j < z.size(); ++j) {
      const Rational& v = q[i][j];
      if (v == 0) continue;
      acc.add_term(z[i] * z[j], i == j ? v : Rational(2 * v));
    }
  return acc;
}

std::vector<MatchingConstraint> gram_matching(const PolynomialTemplate& target,
                                              const MonomialVector& z) {
  auto table = pairing_table(z);
  std::vector<MatchingConstraint> out;
  // every pairing monomial is constrained; target monomials outside the
  // pairing span get an empty gram side (forcing the target coefficient to 0)
  for (auto& [gamma, terms] : table) {
    MatchingConstraint c;
    c.gamma = gamma;
    c.gram_terms = terms;
    auto it = target.find(gamma);
    c.target = it == target.end() ? LinExpr::of_constant(0) : it->second;
    out.push_back(std::move(c));
  }
  for (const auto& [gamma, expr] : target) {
    if (table.count(gamma)) continue;
    MatchingConstraint c;
    c.gamma = gamma;
    c.target = expr;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<MatchingConstraint> gram_matching(const Polynomial& target, const MonomialVector& z) {
  return gram_matching(template_of(target), z);
}

std::string matching_constraint_to_string(const MatchingConstraint& c) {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const MatchingConstraint::GramTerm& t) {
    if (!first) os << "+";
    if (t.multiplicity != 1) os << t.multiplicity;
    os << "q" << (t.i + 1) << (t.j + 1);
    first = false;
  };
  for (const auto& t : c.gram_terms)
    if (t.i == t.j) emit(t);
  for (const auto& t : c.gram_terms)
    if (t.i != t.j) emit(t);
  if (first) os << "0";
  os << " = ";
  first = true;
  for (const auto& [k, v] : c.target.coeffs) {
    if (!first) os << "+";
    if (v != 1) os << rational_to_string(v) << "*";
    os << "a" << (k + 1);
    first = false;
  }
  if (c.target.constant != 0 || first) {
    if (!first) os << "+";
    os << rational_to_string(c.target.constant);
  }
  return os.str();
}

std::vector<Polynomial> extract_squares(const Eigen::MatrixXd& q, const MonomialVector& z,
                                        std::size_t nvars, double psd_tol) {
  if (q.rows() != q.cols() || static_cast<std::size_t>(q.rows()) != z.size())
    throw std::invalid_argument("extract_squares: Gram dimension does not match basis");
  if (z.empty()) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (q + q.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("extract_squares: eigensolver failed to converge");
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw std::invalid_argument("extract_squares: Gram matrix indefinite beyond tolerance");
  std::vector<Polynomial> squares;
  const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  // largest eigenvalue first
  for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
    const double lambda = es.eigenvalues()[k];
    if (lambda <= 1e-14 * lmax) continue;
    const double scale = std::sqrt(lambda);
    Polynomial f(nvars);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double coef = scale * es.eigenvectors()(static_cast<Eigen::Index>(j), k);
      if (coef != 0.0) f.add_term(z[j], rational_from_double(coef));
    }
    if (!f.is_zero()) squares.push_back(std::move(f));
  }
  return squares;
}

DecompositionReport verify_decomposition(const Polynomial& f, const GramDecomposition& d,
                                         double tol) {
  DecompositionReport rep;
  Polynomial sum(f.nvars());
  for (const auto& s : d.squares) sum += s * s;
  rep.max_coeff_residual = (f - sum).max_coeff_abs();
  rep.min_eig = d.z.empty() ? 0.0 : min_eigenvalue(d.q);
  rep.pass = rep.max_coeff_residual <= tol && rep.min_eig >= -tol;
  return rep;
}

namespace {

// shared assembly: fills the Gram block and result decomposition
struct MatchingProgram {
  SdpFeasibilityProblem problem;
  std::vector<MatchingConstraint> matching;
  MonomialVector z;
  int unknown_count = 0;
};

MatchingProgram build_matching_program(const PolynomialTemplate& tmpl,
                                       const std::vector<AffineRow>& affine,
                                       const std::optional<int>& basis_half_degree) {
  const std::size_t nvars = template_nvars(tmpl);
  const int deg = template_degree(tmpl);
  if (deg < 0) throw std::invalid_argument("matching program: zero template");
  MatchingProgram prog;
  if (basis_half_degree) {
    if (*basis_half_degree < 0)
      throw std::invalid_argument("matching program: negative basis degree");
    prog.z = monomial_basis(nvars, *basis_half_degree);
  } else {
    const bool homogeneous = template_homogeneous(tmpl, deg);
    prog.z = homogeneous ? monomial_slice(nvars, deg / 2) : monomial_basis(nvars, deg / 2);
  }
  prog.matching = gram_matching(tmpl, prog.z);

  int unknowns = 0;
  for (const auto& [m, e] : tmpl) {
    (void)m;
    for (const auto& [k, v] : e.coeffs) {
      (void)v;
      unknowns = std::max(unknowns, k + 1);
    }
  }
  for (const auto& row : affine)
    for (const auto& [k, v] : row.coeffs) {
      (void)v;
      unknowns = std::max(unknowns, k + 1);
    }
  prog.unknown_count = unknowns;

  prog.problem.blocks.push_back({"Q", static_cast<int>(prog.z.size())});
  prog.problem.free_vars = unknowns;
  for (const auto& mc : prog.matching) {
    AffineConstraint c;
    for (const auto& t : mc.gram_terms)
      c.matrix_terms.push_back({{0, t.i, t.j}, Rational(t.multiplicity)});
    for (const auto& [k, v] : mc.target.coeffs) c.free_terms.push_back({k, -v});
    c.rhs = mc.target.constant;
    prog.problem.constraints.push_back(std::move(c));
  }
  for (const auto& row : affine) {
    AffineConstraint c;
    for (const auto& [k, v] : row.coeffs) c.free_terms.push_back({k, v});
    c.rhs = row.rhs;
    prog.problem.constraints.push_back(std::move(c));
  }
  return prog;
}

// Build the decomposition from a solved Gram block; exact identity against
// `target` decides whether small-denominator rounding is kept.
GramDecomposition finish_decomposition(const Polynomial& target, const MonomialVector& z,
                                       const Eigen::MatrixXd& q, const SosOptions& options) {
  GramDecomposition d;
  d.z = z;
  d.q = 0.5 * (q + q.transpose());
  if (auto rq = rounded_matrix(d.q, options.round_den_cap)) {
    Polynomial form = gram_form(*rq, z, target.nvars());
    if (form == target && rational_psd(*rq)) {
      d.q_rational = std::move(*rq);
      d.rounded_rational = true;
      d.residual = 0.0;
      for (std::size_t r = 0; r < z.size(); ++r)
        for (std::size_t c = 0; c < z.size(); ++c)
          d.q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              to_double(d.q_rational[r][c]);
      d.squares = extract_squares(d.q, z, target.nvars(), options.solve.psd_tol);
      return d;
    }
  }
  d.q_rational = dyadic_matrix(d.q);
  d.rounded_rational = false;
  d.residual = (target - gram_form(d.q_rational, z, target.nvars())).max_coeff_abs();
  d.squares = extract_squares(d.q, z, target.nvars(), options.solve.psd_tol);
  return d;
}

}  // namespace

SosResult sos_check(const Polynomial& f, const SosOptions& options) {
  SosResult res;
  if (f.is_zero()) {
    res.feasible = true;  // empty sum of squares
    return res;
  }
  if (f.degree() % 2 != 0) {
    res.reason = "odd degree cannot be SOS";
    return res;
  }
  MatchingProgram prog = build_matching_program(template_of(f), {}, options.basis_half_degree);
  SolveStatus status = solve(prog.problem, options.solve);
  if (!status.feasible()) {
    res.reason = status.diagnostic.empty() ? "no PSD Gram matrix found" : status.diagnostic;
    return res;
  }
  res.feasible = true;
  res.decomposition = finish_decomposition(f, prog.z, status.solution.block_values[0], options);
  return res;
}

SosAffineResult sos_with_affine(const PolynomialTemplate& tmpl,
                                const std::vector<AffineRow>& affine,
                                const SosOptions& options) {
  SosAffineResult res;
  const std::size_t nvars = template_nvars(tmpl);
  const int deg = template_degree(tmpl);
  if (deg % 2 != 0) {
    res.reason = "odd degree cannot be SOS";
    return res;
  }
  MatchingProgram prog = build_matching_program(tmpl, affine, options.basis_half_degree);
  SolveStatus status = solve(prog.problem, options.solve);
  if (!status.feasible()) {
    res.reason = status.diagnostic.empty() ? "no PSD Gram matrix found" : status.diagnostic;
    return res;
  }
  res.feasible = true;

  // unknowns: keep exact small rationals when they reproduce a consistent
  // realized polynomial, else exact dyadic images of the floats
  std::vector<Rational> a(static_cast<std::size_t>(prog.unknown_count));
  for (int k = 0; k < prog.unknown_count; ++k) {
    const double v = status.solution.free_values[k];
    auto r = round_to_rational(v, options.round_den_cap);
    a[static_cast<std::size_t>(k)] = r ? *r : rational_from_double(v);
  }
  Polynomial realized(nvars);
  for (const auto& [m, e] : tmpl) {
    Rational c = e.constant;
    for (const auto& [k, v] : e.coeffs) c += v * a[static_cast<std::size_t>(k)];
    realized.add_term(m, c);
  }
  res.a = std::move(a);
  res.realized = realized;
  res.decomposition =
      finish_decomposition(realized, prog.z, status.solution.block_values[0], options);
  return res;
}

}  // namespace shapecert
