#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapecert/polynomial.hpp"
#include "shapecert/sdp.hpp"

namespace shapecert {

/// Affine expression in scalar unknowns: sum(coeffs[k] * a_k) + constant.
struct LinExpr {
  std::map<int, Rational> coeffs;
  Rational constant = 0;

  static LinExpr of_constant(Rational c) { return LinExpr{{}, std::move(c)}; }
  static LinExpr of_unknown(int k) { return LinExpr{{{k, Rational(1)}}, 0}; }
  bool is_constant() const { return coeffs.empty(); }
};

/// Polynomial whose coefficients are affine in scalar unknowns a.
using PolynomialTemplate = std::map<Monomial, LinExpr, GradedLexLess>;

/// One row of G a = h.
struct AffineRow {
  std::map<int, Rational> coeffs;
  Rational rhs = 0;
};

/// One coefficient-matching equation: sum over Gram entries (i <= j, with
/// multiplicity 1 on the diagonal and 2 off it) equals the coefficient of
/// `gamma` in the target.
struct MatchingConstraint {
  Monomial gamma;
  struct GramTerm {
    int i = 0;
    int j = 0;
    int multiplicity = 1;
  };
  std::vector<GramTerm> gram_terms;
  LinExpr target;  // affine in the unknowns a (constant for plain targets)
};

/// The matching equations of F(x) = z^T Q z over an explicit basis z.
/// Exposed so the structure itself can be inspected and tested.
std::vector<MatchingConstraint> gram_matching(const PolynomialTemplate& target,
                                              const MonomialVector& z);
std::vector<MatchingConstraint> gram_matching(const Polynomial& target, const MonomialVector& z);

/// z^T Q z expanded exactly over the rational Gram entries.
Polynomial gram_form(const std::vector<std::vector<Rational>>& q, const MonomialVector& z,
                     std::size_t nvars);

/// Render "q11 = a1" style text for a matching constraint (1-based indices,
/// diagonal entries first).
std::string matching_constraint_to_string(const MatchingConstraint& c);

struct GramDecomposition {
  MonomialVector z;
  Eigen::MatrixXd q;   // floating Gram matrix
  std::vector<std::vector<Rational>> q_rational;  // rounded or exact-dyadic entries
  bool rounded_rational = false;  // small-denominator rounding verified exactly
  std::vector<Polynomial> squares;
  double residual = 0.0;  // max coefficient error of F - z^T Q z (exact recompute)
};

struct SosOptions {
  SolveOptions solve;
  std::uint64_t round_den_cap = 1000000;
  std::optional<int> basis_half_degree;  // override the default basis degree
};

struct SosResult {
  bool feasible = false;
  std::string reason;  // set when not feasible
  GramDecomposition decomposition;
};

/// Theorem-1 test: F is a sum of squares iff a PSD Gram matrix exists over
/// the monomial basis of degree <= deg(F)/2 (the exact-degree slice when F
/// is homogeneous). Unknown is one-sided: no PSD Gram was found.
SosResult sos_check(const Polynomial& f, const SosOptions& options = {});

struct SosAffineResult {
  bool feasible = false;
  std::string reason;
  std::vector<Rational> a;  // solved unknowns (rounded when possible)
  Polynomial realized;      // template with a substituted
  GramDecomposition decomposition;
};

/// Joint search for coefficients a (subject to affine rows) and a PSD Gram
/// matrix of the realized polynomial.
SosAffineResult sos_with_affine(const PolynomialTemplate& tmpl,
                                const std::vector<AffineRow>& affine,
                                const SosOptions& options = {});

/// Square roots of the Gram form: Q = sum l_k v_k v_k^T (negatives clamped),
/// f_k = sqrt(l_k) * (v_k . z). Throws if Q is indefinite beyond psd_tol.
std::vector<Polynomial> extract_squares(const Eigen::MatrixXd& q, const MonomialVector& z,
                                        std::size_t nvars, double psd_tol = 1e-8);

struct DecompositionReport {
  double max_coeff_residual = 0.0;  // of F - sum f_i^2
  double min_eig = 0.0;
  bool pass = false;
};

/// Recomputes F - sum of squares and the Gram spectrum, independently of
/// how the decomposition was produced.
DecompositionReport verify_decomposition(const Polynomial& f, const GramDecomposition& d,
                                         double tol);

}  // namespace shapecert
