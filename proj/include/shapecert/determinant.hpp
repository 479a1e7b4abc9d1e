#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "shapecert/polynomial.hpp"
#include "shapecert/rational.hpp"

namespace shapecert {

namespace detail {
inline bool is_zero_elem(const Rational& r) { return r == 0; }
inline bool is_zero_elem(const Polynomial& p) { return p.is_zero(); }
inline Rational exact_div(const Rational& a, const Rational& b) { return a / b; }
inline Polynomial exact_div(const Polynomial& a, const Polynomial& b) { return a.divide_exact(b); }
}  // namespace detail

/// Square matrix in row-major storage for the symbolic paths.
template <class T>
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<T> data;

  SquareMatrix() = default;
  SquareMatrix(std::size_t n_, T fill) : n(n_), data(n_ * n_, fill) {}

  T& at(std::size_t r, std::size_t c) { return data[r * n + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

/// Determinant by fraction-free (Bareiss) Gaussian elimination over an
/// integral domain; intermediate entries stay in the domain and each
/// division is exact. Row swaps track the sign; a fully zero pivot
/// column short-circuits to zero.
template <class T>
T bareiss_determinant(SquareMatrix<T> m, const T& one) {
  const std::size_t n = m.n;
  if (n == 0) return one;
  if (n == 1) return m.at(0, 0);
  T prev = one;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (detail::is_zero_elem(m.at(k, k))) {
      std::size_t pivot = k + 1;
      while (pivot < n && detail::is_zero_elem(m.at(pivot, k))) ++pivot;
      if (pivot == n) return m.at(k, k);  // singular: a zero of the ring
      for (std::size_t c = k; c < n; ++c) std::swap(m.at(k, c), m.at(pivot, c));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        m.at(i, j) = detail::exact_div(m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j), prev);
    prev = m.at(k, k);
  }
  T det = std::move(m.at(n - 1, n - 1));
  return sign < 0 ? -det : det;
}

inline Rational bareiss_determinant(SquareMatrix<Rational> m) {
  return bareiss_determinant(std::move(m), Rational(1));
}

inline Polynomial bareiss_determinant(SquareMatrix<Polynomial> m, std::size_t nvars) {
  return bareiss_determinant(std::move(m), Polynomial::constant(nvars, 1));
}

}  // namespace shapecert
