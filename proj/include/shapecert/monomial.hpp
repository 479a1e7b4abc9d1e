#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapecert {

/// Exponent tuple of a power product. Length equals the variable count of
/// the enclosing ring. Stored inline for small rings with the total degree
/// cached, since order comparisons dominate polynomial arithmetic.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exps_(nvars, 0) {}
  Monomial(std::initializer_list<std::uint32_t> e) {
    exps_.reserve(e.size());
    for (auto v : e) {
      exps_.push_back(check_exp(v));
      degree_ += v;
    }
  }

  std::size_t nvars() const { return exps_.size(); }
  int degree() const { return static_cast<int>(degree_); }

  std::uint32_t exp(std::size_t i) const { return exps_[i]; }

  void set_exp(std::size_t i, std::uint32_t e) {
    const std::uint16_t v = check_exp(e);
    degree_ += e - exps_[i];
    exps_[i] = v;
  }

  std::vector<std::uint32_t> exponents() const {
    return std::vector<std::uint32_t>(exps_.begin(), exps_.end());
  }

  bool is_one() const { return degree_ == 0; }

  Monomial operator*(const Monomial& o) const {
    if (exps_.size() != o.exps_.size())
      throw std::invalid_argument("monomial product: variable count mismatch");
    Monomial r(*this);
    for (std::size_t i = 0; i < exps_.size(); ++i)
      r.exps_[i] = check_exp(static_cast<std::uint32_t>(r.exps_[i]) + o.exps_[i]);
    r.degree_ += o.degree_;
    return r;
  }

  bool divides(const Monomial& o) const {
    if (exps_.size() != o.exps_.size()) return false;
    for (std::size_t i = 0; i < exps_.size(); ++i)
      if (exps_[i] > o.exps_[i]) return false;
    return true;
  }

  /// Quotient o / this, valid when divides(o).
  Monomial quotient_of(const Monomial& o) const {
    Monomial r(o);
    for (std::size_t i = 0; i < exps_.size(); ++i) r.exps_[i] -= exps_[i];
    r.degree_ -= degree_;
    return r;
  }

  bool operator==(const Monomial& o) const { return degree_ == o.degree_ && exps_ == o.exps_; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  /// Graded lexicographic: lower total degree first; within a degree the
  /// lexicographically larger exponent tuple comes first, so on two
  /// variables: 1, x, y, x^2, xy, y^2, ...
  bool graded_lex_before(const Monomial& o) const {
    if (degree_ != o.degree_) return degree_ < o.degree_;
    const std::size_t n = std::min(exps_.size(), o.exps_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (exps_[i] != o.exps_[i]) return exps_[i] > o.exps_[i];
    return false;
  }

 private:
  static std::uint16_t check_exp(std::uint32_t e) {
    if (e > 0xffff) throw std::overflow_error("monomial exponent exceeds representable range");
    return static_cast<std::uint16_t>(e);
  }

  boost::container::small_vector<std::uint16_t, 16> exps_;
  std::uint32_t degree_ = 0;
};

struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return a.graded_lex_before(b); }
};

inline bool graded_lex_less(const Monomial& a, const Monomial& b) {
  return a.graded_lex_before(b);
}

/// Ordered monomial vector z(x): strictly increasing in graded lex order.
using MonomialVector = std::vector<Monomial>;

namespace detail {
inline void enumerate_degree(std::size_t nvars, int degree, std::size_t var,
                             Monomial& scratch, MonomialVector& out) {
  if (var + 1 == nvars) {
    scratch.set_exp(var, static_cast<std::uint32_t>(degree));
    out.push_back(scratch);
    scratch.set_exp(var, 0);
    return;
  }
  // descending first exponent keeps graded-lex order within the slice
  for (int e = degree; e >= 0; --e) {
    scratch.set_exp(var, static_cast<std::uint32_t>(e));
    enumerate_degree(nvars, degree - e, var + 1, scratch, out);
  }
  scratch.set_exp(var, 0);
}
}  // namespace detail

/// All monomials of total degree exactly `degree`, graded-lex order.
inline MonomialVector monomial_slice(std::size_t nvars, int degree) {
  if (degree < 0) throw std::invalid_argument("monomial_slice: negative degree");
  MonomialVector out;
  if (nvars == 0) {
    if (degree == 0) out.emplace_back(std::size_t{0});
    return out;
  }
  Monomial scratch(nvars);
  detail::enumerate_degree(nvars, degree, 0, scratch, out);
  return out;
}

/// All monomials of total degree <= max_degree, graded-lex order.
/// Count is C(nvars + max_degree, max_degree).
inline MonomialVector monomial_basis(std::size_t nvars, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("monomial_basis: negative degree");
  MonomialVector out;
  for (int d = 0; d <= max_degree; ++d) {
    MonomialVector slice = monomial_slice(nvars, d);
    out.insert(out.end(), slice.begin(), slice.end());
  }
  return out;
}

/// Render with the given variable names, e.g. x0^2*x1.
inline std::string monomial_to_string(const Monomial& m,
                                      const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < m.nvars(); ++i) {
    if (m.exp(i) == 0) continue;
    if (!s.empty()) s += "*";
    s += (i < names.size()) ? names[i] : ("x" + std::to_string(i));
    if (m.exp(i) > 1) s += "^" + std::to_string(m.exp(i));
  }
  return s.empty() ? "1" : s;
}

}  // namespace shapecert
