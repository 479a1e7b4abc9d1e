#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace shapecert {

using BigInt = boost::multiprecision::cpp_int;
/// Exact rational coefficient type. All algebraic bookkeeping is exact;
/// doubles appear only at SDP solve time and at evaluation.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
  return Rational(x);
}

/// Best rational approximation with denominator <= den_cap, by walking the
/// continued-fraction convergents of x. Returns nullopt for non-finite x.
inline std::optional<Rational> round_to_rational(double x, std::uint64_t den_cap = 1000000) {
  if (!std::isfinite(x)) return std::nullopt;
  const bool neg = x < 0;
  double v = neg ? -x : x;
  // p/q convergents
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = v;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(frac);
    if (fl > 9e18) break;
    BigInt a = static_cast<std::int64_t>(fl);
    BigInt p2 = a * p1 + p0;
    BigInt q2 = a * q1 + q0;
    if (q2 > den_cap) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double rem = frac - fl;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) return std::nullopt;
  Rational r(p1, q1);
  return neg ? Rational(-r) : r;
}

/// "p/q" or plain integer text. Matches the certificate file encoding.
inline std::string rational_to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational rational_from_string(const std::string& s) {
  try {
    return Rational(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: '" + s + "'");
  }
}

/// num/den as int64, or nullopt when either does not fit.
inline std::optional<std::pair<std::int64_t, std::int64_t>> rational_to_int64_pair(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  const BigInt lo = std::numeric_limits<std::int64_t>::min();
  const BigInt hi = std::numeric_limits<std::int64_t>::max();
  if (num < lo || num > hi || den > hi) return std::nullopt;
  return std::make_pair(num.convert_to<std::int64_t>(), den.convert_to<std::int64_t>());
}

}  // namespace shapecert
