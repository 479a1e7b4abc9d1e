#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "shapecert/monomial.hpp"
#include "shapecert/rational.hpp"

namespace shapecert {

/// Sparse multivariate polynomial with exact rational coefficients.
/// Canonical form: no stored zero coefficients, all monomials have
/// exponent length nvars. The zero polynomial has an empty term map.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rational, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial zero(std::size_t nvars) { return Polynomial(nvars); }
  static Polynomial constant(std::size_t nvars, Rational c);
  static Polynomial variable(std::size_t nvars, std::size_t index);
  static Polynomial term(std::size_t nvars, Monomial m, Rational c);

  std::size_t nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  /// Total degree; the zero polynomial reports -1.
  int degree() const;
  bool is_homogeneous() const;

  const TermMap& terms() const { return terms_; }

  /// Coefficient of m (zero if absent).
  Rational coefficient(const Monomial& m) const;

  /// Greatest term in graded lex order. Precondition: nonzero.
  const std::pair<const Monomial, Rational>& leading_term() const;

  Polynomial operator-() const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);

  Polynomial scaled(const Rational& c) const;
  Polynomial pow(unsigned k) const;

  bool operator==(const Polynomial& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }
  bool operator!=(const Polynomial& o) const { return !(*this == o); }

  /// Formal partial derivative with respect to variable var.
  Polynomial differentiate(std::size_t var) const;

  /// Floating evaluation, direct term summation in term order.
  double evaluate(std::span<const double> point) const;

  /// Exact evaluation at a rational point.
  Rational evaluate_exact(std::span<const Rational> point) const;

  /// Substitute an exact value for one variable; the ring keeps nvars
  /// (the variable simply no longer occurs).
  Polynomial substitute(std::size_t var, const Rational& value) const;

  /// Reindex variables into a ring with new_nvars variables.
  /// var_map[i] is the new index of old variable i, or -1 if the variable
  /// must no longer occur (throws if it does).
  Polynomial remap_variables(const std::vector<int>& var_map, std::size_t new_nvars) const;

  /// Exact quotient this / divisor; throws std::domain_error when the
  /// division is not exact. Used by the fraction-free elimination.
  Polynomial divide_exact(const Polynomial& divisor) const;

  /// Largest coefficient magnitude as a double (0 for the zero polynomial).
  double max_coeff_abs() const;

  /// Add c * m, erasing the entry when the sum cancels.
  void add_term(const Monomial& m, const Rational& c);

  std::string to_string(const std::vector<std::string>& names = {}) const;

  friend Polynomial operator*(const Rational& c, const Polynomial& p) { return p.scaled(c); }

 private:
  void check_same_ring(const Polynomial& o) const;

  std::size_t nvars_ = 0;
  TermMap terms_;
};

}  // namespace shapecert
