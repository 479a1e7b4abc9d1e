#include "shapecert/polynomial.hpp"

#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace shapecert {

Polynomial Polynomial::constant(std::size_t nvars, Rational c) {
  Polynomial p(nvars);
  if (c != 0) p.terms_.emplace(Monomial(nvars), std::move(c));
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  if (index >= nvars) throw std::out_of_range("Polynomial::variable: index out of range");
  Monomial m(nvars);
  m.set_exp(index, 1);
  return term(nvars, std::move(m), 1);
}

Polynomial Polynomial::term(std::size_t nvars, Monomial m, Rational c) {
  if (m.nvars() != nvars) throw std::invalid_argument("Polynomial::term: exponent length mismatch");
  Polynomial p(nvars);
  if (c != 0) p.terms_.emplace(std::move(m), std::move(c));
  return p;
}

int Polynomial::degree() const {
  if (terms_.empty()) return -1;
  // graded order: the last term has maximal total degree
  return terms_.rbegin()->first.degree();
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  const int d = terms_.begin()->first.degree();
  return terms_.rbegin()->first.degree() == d;
}

Rational Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

const std::pair<const Monomial, Rational>& Polynomial::leading_term() const {
  if (terms_.empty()) throw std::logic_error("leading_term of zero polynomial");
  return *terms_.rbegin();
}

void Polynomial::check_same_ring(const Polynomial& o) const {
  if (nvars_ != o.nvars_)
    throw std::invalid_argument("polynomial rings differ (nvars " + std::to_string(nvars_) +
                                " vs " + std::to_string(o.nvars_) + ")");
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same_ring(o);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_same_ring(o);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

namespace {

// merge two ascending term sequences; sign applies to the second
Polynomial::TermMap merge_terms(const Polynomial::TermMap& a, const Polynomial::TermMap& b,
                                int sign) {
  Polynomial::TermMap out;
  auto ia = a.begin();
  auto ib = b.begin();
  auto hint = out.end();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first.graded_lex_before(ib->first))) {
      hint = out.emplace_hint(out.end(), ia->first, ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first.graded_lex_before(ia->first)) {
      hint = out.emplace_hint(out.end(), ib->first, sign < 0 ? Rational(-ib->second) : ib->second);
      ++ib;
    } else {
      Rational c = sign < 0 ? Rational(ia->second - ib->second) : Rational(ia->second + ib->second);
      if (c != 0) hint = out.emplace_hint(out.end(), ia->first, std::move(c));
      ++ia;
      ++ib;
    }
  }
  (void)hint;
  return out;
}

}  // namespace

Polynomial Polynomial::operator+(const Polynomial& o) const {
  check_same_ring(o);
  Polynomial r(nvars_);
  r.terms_ = merge_terms(terms_, o.terms_, +1);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  check_same_ring(o);
  Polynomial r(nvars_);
  r.terms_ = merge_terms(terms_, o.terms_, -1);
  return r;
}

namespace {

// Heap-merge sparse product (one descending stream per left term). Output
// comes out in descending order, so the map builds linearly from the back.
struct MulStream {
  Monomial mono;
  std::uint32_t ia;
  std::uint32_t ib;  // descending index into the right operand
};

struct MulStreamLess {
  bool operator()(const MulStream& x, const MulStream& y) const {
    return x.mono.graded_lex_before(y.mono);  // max-heap on the monomial
  }
};

// Packed fast path: 5-bit exponent fields (earlier variables more
// significant) plus the total degree in the top bits. Valid while every
// total degree involved stays <= 31 and the ring has <= 11 variables;
// then products add without carries and the integer order matches the
// graded lex order after flipping the field bits.
constexpr std::size_t kPackMaxVars = 11;
constexpr unsigned kDegShift = 55;
constexpr std::uint64_t kFieldMask = (std::uint64_t(1) << kDegShift) - 1;

std::uint64_t pack_raw(const Monomial& m) {
  std::uint64_t raw = static_cast<std::uint64_t>(m.degree()) << kDegShift;
  for (std::size_t i = 0; i < m.nvars(); ++i)
    raw |= static_cast<std::uint64_t>(m.exp(i)) << (5 * (kPackMaxVars - 1 - i));
  return raw;
}

Monomial unpack_raw(std::uint64_t raw, std::size_t nvars) {
  Monomial m(nvars);
  for (std::size_t i = 0; i < nvars; ++i)
    m.set_exp(i, static_cast<std::uint32_t>((raw >> (5 * (kPackMaxVars - 1 - i))) & 31));
  return m;
}

// ascending in graded lex <=> ascending as integers
std::uint64_t order_key(std::uint64_t raw) {
  return (raw & ~kFieldMask) | (~raw & kFieldMask);
}

int pack_degree(std::uint64_t raw) { return static_cast<int>(raw >> kDegShift); }

bool packed_divides(std::uint64_t lead, std::uint64_t m, std::size_t nvars) {
  for (std::size_t i = 0; i < nvars; ++i) {
    const unsigned sh = 5 * static_cast<unsigned>(kPackMaxVars - 1 - i);
    if (((lead >> sh) & 31) > ((m >> sh) & 31)) return false;
  }
  return true;
}

using PackedEntry = std::tuple<std::uint64_t, std::uint64_t, std::uint32_t, std::uint32_t>;
// (order key, raw monomial, stream index, position)

// Integer lane: fraction-free elimination keeps coefficients integral, and
// small enough values accumulate exactly in 128 bits. Falls back to the
// rational lane whenever a value escapes the guard.
constexpr std::int64_t kIntLaneBound = std::int64_t(1) << 46;

std::optional<std::int64_t> as_small_int(const Rational& r) {
  if (boost::multiprecision::denominator(r) != 1) return std::nullopt;
  const BigInt& num = boost::multiprecision::numerator(r);
  if (num > kIntLaneBound || num < -kIntLaneBound) return std::nullopt;
  return num.convert_to<std::int64_t>();
}

Rational rational_from_int128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  BigInt big = static_cast<std::uint64_t>(u >> 64);
  big <<= 64;
  big += static_cast<std::uint64_t>(u);
  if (neg) big = -big;
  return Rational(big);
}

}  // namespace

Polynomial Polynomial::operator*(const Polynomial& o) const {
  check_same_ring(o);
  Polynomial r(nvars_);
  if (terms_.empty() || o.terms_.empty()) return r;

  // iterate the smaller operand as stream set
  const bool left_small = terms_.size() <= o.terms_.size();
  const TermMap& am = left_small ? terms_ : o.terms_;
  const TermMap& bm = left_small ? o.terms_ : terms_;

  if (am.size() * bm.size() <= 256) {
    for (const auto& [ma, ca] : am)
      for (const auto& [mb, cb] : bm) r.add_term(ma * mb, ca * cb);
    return r;
  }

  std::vector<const Rational*> ac, bc;
  ac.reserve(am.size());
  bc.reserve(bm.size());
  for (const auto& [m, c] : am) ac.push_back(&c);
  for (const auto& [m, c] : bm) bc.push_back(&c);

  if (nvars_ <= kPackMaxVars && degree() + o.degree() <= 31) {
    std::vector<std::uint64_t> ar, br;
    ar.reserve(am.size());
    br.reserve(bm.size());
    for (const auto& [m, c] : am) ar.push_back(pack_raw(m));
    for (const auto& [m, c] : bm) br.push_back(pack_raw(m));

    std::vector<std::int64_t> ai, bi;
    bool int_lane = true;
    for (const auto* c : ac) {
      auto v = as_small_int(*c);
      if (!v) {
        int_lane = false;
        break;
      }
      ai.push_back(*v);
    }
    if (int_lane)
      for (const auto* c : bc) {
        auto v = as_small_int(*c);
        if (!v) {
          int_lane = false;
          break;
        }
        bi.push_back(*v);
      }

    std::priority_queue<PackedEntry> heap;
    const std::uint32_t blast = static_cast<std::uint32_t>(br.size()) - 1;
    for (std::uint32_t i = 0; i < ar.size(); ++i) {
      const std::uint64_t raw = ar[i] + br[blast];
      heap.push({order_key(raw), raw, i, blast});
    }
    std::vector<std::pair<std::uint64_t, Rational>> out;  // descending
    while (!heap.empty()) {
      const std::uint64_t key = std::get<0>(heap.top());
      const std::uint64_t raw = std::get<1>(heap.top());
      if (int_lane) {
        __int128 c = 0;
        while (!heap.empty() && std::get<0>(heap.top()) == key) {
          const auto [k, rw, ia, ib] = heap.top();
          heap.pop();
          c += static_cast<__int128>(ai[ia]) * bi[ib];
          if (ib > 0) {
            const std::uint64_t nraw = ar[ia] + br[ib - 1];
            heap.push({order_key(nraw), nraw, ia, ib - 1});
          }
        }
        if (c != 0) out.emplace_back(raw, rational_from_int128(c));
      } else {
        Rational c = 0;
        while (!heap.empty() && std::get<0>(heap.top()) == key) {
          const auto [k, rw, ia, ib] = heap.top();
          heap.pop();
          c += *ac[ia] * *bc[ib];
          if (ib > 0) {
            const std::uint64_t nraw = ar[ia] + br[ib - 1];
            heap.push({order_key(nraw), nraw, ia, ib - 1});
          }
        }
        if (c != 0) out.emplace_back(raw, std::move(c));
      }
    }
    for (auto it = out.rbegin(); it != out.rend(); ++it)
      r.terms_.emplace_hint(r.terms_.end(), unpack_raw(it->first, nvars_), std::move(it->second));
    return r;
  }

  std::vector<const Monomial*> amn, bmn;
  amn.reserve(am.size());
  bmn.reserve(bm.size());
  for (const auto& [m, c] : am) amn.push_back(&m);
  for (const auto& [m, c] : bm) bmn.push_back(&m);

  std::priority_queue<MulStream, std::vector<MulStream>, MulStreamLess> heap;
  const std::uint32_t blast = static_cast<std::uint32_t>(bmn.size()) - 1;
  for (std::uint32_t i = 0; i < amn.size(); ++i) heap.push({*amn[i] * *bmn[blast], i, blast});

  std::vector<std::pair<Monomial, Rational>> out;  // descending
  while (!heap.empty()) {
    Monomial m = heap.top().mono;
    Rational c = 0;
    while (!heap.empty() && heap.top().mono == m) {
      const MulStream s = heap.top();
      heap.pop();
      c += *ac[s.ia] * *bc[s.ib];
      if (s.ib > 0) heap.push({*amn[s.ia] * *bmn[s.ib - 1], s.ia, s.ib - 1});
    }
    if (c != 0) out.emplace_back(std::move(m), std::move(c));
  }
  for (auto it = out.rbegin(); it != out.rend(); ++it)
    r.terms_.emplace_hint(r.terms_.end(), std::move(it->first), std::move(it->second));
  return r;
}

Polynomial Polynomial::scaled(const Rational& c) const {
  Polynomial r(nvars_);
  if (c == 0) return r;
  for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
  return r;
}

Polynomial Polynomial::pow(unsigned k) const {
  Polynomial acc = constant(nvars_, 1);
  Polynomial base(*this);
  while (k) {
    if (k & 1u) acc = acc * base;
    k >>= 1u;
    if (k) base = base * base;
  }
  return acc;
}

Polynomial Polynomial::differentiate(std::size_t var) const {
  if (var >= nvars_) throw std::out_of_range("differentiate: variable index out of range");
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    const auto e = m.exp(var);
    if (e == 0) continue;
    Monomial d(m);
    d.set_exp(var, e - 1);
    r.add_term(d, c * e);
  }
  return r;
}

namespace {
double ipow(double x, std::uint32_t e) {
  double acc = 1.0;
  while (e) {
    if (e & 1u) acc *= x;
    x *= x;
    e >>= 1u;
  }
  return acc;
}
}  // namespace

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != nvars_) throw std::invalid_argument("evaluate: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = to_double(c);
    for (std::size_t i = 0; i < nvars_; ++i)
      if (m.exp(i)) t *= ipow(point[i], m.exp(i));
    sum += t;
  }
  return sum;
}

Rational Polynomial::evaluate_exact(std::span<const Rational> point) const {
  if (point.size() != nvars_) throw std::invalid_argument("evaluate_exact: point dimension mismatch");
  Rational sum = 0;
  for (const auto& [m, c] : terms_) {
    Rational t = c;
    for (std::size_t i = 0; i < nvars_; ++i)
      for (std::uint32_t k = 0; k < m.exp(i); ++k) t *= point[i];
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::substitute(std::size_t var, const Rational& value) const {
  if (var >= nvars_) throw std::out_of_range("substitute: variable index out of range");
  Polynomial r(nvars_);
  for (const auto& [m, c] : terms_) {
    Rational coef = c;
    for (std::uint32_t k = 0; k < m.exp(var); ++k) coef *= value;
    if (coef == 0) continue;
    Monomial reduced(m);
    reduced.set_exp(var, 0);
    r.add_term(reduced, coef);
  }
  return r;
}

Polynomial Polynomial::remap_variables(const std::vector<int>& var_map, std::size_t new_nvars) const {
  if (var_map.size() != nvars_) throw std::invalid_argument("remap_variables: map length mismatch");
  Polynomial r(new_nvars);
  for (const auto& [m, c] : terms_) {
    Monomial nm(new_nvars);
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (m.exp(i) == 0) continue;
      if (var_map[i] < 0)
        throw std::invalid_argument("remap_variables: dropped variable still occurs");
      if (static_cast<std::size_t>(var_map[i]) >= new_nvars)
        throw std::out_of_range("remap_variables: target index out of range");
      const std::size_t tgt = static_cast<std::size_t>(var_map[i]);
      nm.set_exp(tgt, nm.exp(tgt) + m.exp(i));
    }
    r.add_term(nm, c);
  }
  return r;
}

namespace {

// Heap entry for sparse long division: either a term of the dividend or a
// term of quotient[qi] * divisor[di] (both pending subtraction).
struct DivStream {
  Monomial mono;
  std::uint32_t qi;
  std::uint32_t di;
  bool from_dividend;
};

struct DivStreamLess {
  bool operator()(const DivStream& x, const DivStream& y) const {
    return x.mono.graded_lex_before(y.mono);
  }
};

}  // namespace

Polynomial Polynomial::divide_exact(const Polynomial& divisor) const {
  check_same_ring(divisor);
  if (divisor.is_zero()) throw std::domain_error("divide_exact: division by zero polynomial");
  Polynomial quotient(nvars_);
  if (terms_.empty()) return quotient;

  if (nvars_ <= kPackMaxVars && degree() <= 31) {
    // packed variant: every monomial involved divides into the dividend's
    // degree bound, so the 5-bit fields cannot overflow
    std::vector<std::uint64_t> ar, dr;
    std::vector<const Rational*> ac, dc;
    ar.reserve(terms_.size());
    ac.reserve(terms_.size());
    for (const auto& [m, c] : terms_) {
      ar.push_back(pack_raw(m));
      ac.push_back(&c);
    }
    dr.reserve(divisor.terms_.size());
    dc.reserve(divisor.terms_.size());
    for (const auto& [m, c] : divisor.terms_) {
      dr.push_back(pack_raw(m));
      dc.push_back(&c);
    }
    const std::uint64_t lead_raw = dr.back();
    const Rational& lead_c = *dc.back();
    const std::uint32_t dtrail = static_cast<std::uint32_t>(dr.size()) - 1;
    constexpr std::uint32_t kDividend = 0xffffffffu;  // marks the dividend stream

    // integer lane first; bail out to the rational lane on any violation
    auto try_int_lane = [&]() -> std::optional<std::vector<std::pair<std::uint64_t, Rational>>> {
      std::vector<std::int64_t> ai, di;
      for (const auto* c : ac) {
        auto v = as_small_int(*c);
        if (!v) return std::nullopt;
        ai.push_back(*v);
      }
      for (const auto* c : dc) {
        auto v = as_small_int(*c);
        if (!v) return std::nullopt;
        di.push_back(*v);
      }
      const std::int64_t lead = di.back();
      std::vector<std::pair<std::uint64_t, std::int64_t>> quo;
      std::priority_queue<PackedEntry> heap;
      const std::uint32_t last = static_cast<std::uint32_t>(ar.size()) - 1;
      heap.push({order_key(ar[last]), ar[last], kDividend, last});
      while (!heap.empty()) {
        const std::uint64_t key = std::get<0>(heap.top());
        const std::uint64_t raw = std::get<1>(heap.top());
        __int128 c = 0;
        while (!heap.empty() && std::get<0>(heap.top()) == key) {
          const auto [k, rw, qi, pos] = heap.top();
          heap.pop();
          if (qi == kDividend) {
            c += ai[pos];
            if (pos > 0) heap.push({order_key(ar[pos - 1]), ar[pos - 1], kDividend, pos - 1});
          } else {
            c -= static_cast<__int128>(quo[qi].second) * di[pos];
            if (pos > 0) {
              const std::uint64_t nraw = quo[qi].first + dr[pos - 1];
              heap.push({order_key(nraw), nraw, qi, pos - 1});
            }
          }
        }
        if (c == 0) continue;
        if (pack_degree(lead_raw) > pack_degree(raw) || !packed_divides(lead_raw, raw, nvars_))
          throw std::domain_error("divide_exact: division not exact");
        if (c % lead != 0) return std::nullopt;  // exact over Q but not Z
        const __int128 q = c / lead;
        if (q > kIntLaneBound || q < -kIntLaneBound) return std::nullopt;
        quo.emplace_back(raw - lead_raw, static_cast<std::int64_t>(q));
        if (dtrail > 0) {
          const std::uint32_t qi = static_cast<std::uint32_t>(quo.size()) - 1;
          const std::uint64_t nraw = quo.back().first + dr[dtrail - 1];
          heap.push({order_key(nraw), nraw, qi, dtrail - 1});
        }
      }
      std::vector<std::pair<std::uint64_t, Rational>> out;
      out.reserve(quo.size());
      for (const auto& [raw, v] : quo) out.emplace_back(raw, Rational(v));
      return out;
    };

    std::vector<std::pair<std::uint64_t, Rational>> quo;  // descending
    if (auto fast = try_int_lane()) {
      quo = std::move(*fast);
    } else {
      std::priority_queue<PackedEntry> heap;
      const std::uint32_t last = static_cast<std::uint32_t>(ar.size()) - 1;
      heap.push({order_key(ar[last]), ar[last], kDividend, last});
      while (!heap.empty()) {
        const std::uint64_t key = std::get<0>(heap.top());
        const std::uint64_t raw = std::get<1>(heap.top());
        Rational c = 0;
        while (!heap.empty() && std::get<0>(heap.top()) == key) {
          const auto [k, rw, qi, pos] = heap.top();
          heap.pop();
          if (qi == kDividend) {
            c += *ac[pos];
            if (pos > 0) heap.push({order_key(ar[pos - 1]), ar[pos - 1], kDividend, pos - 1});
          } else {
            c -= quo[qi].second * *dc[pos];
            if (pos > 0) {
              const std::uint64_t nraw = quo[qi].first + dr[pos - 1];
              heap.push({order_key(nraw), nraw, qi, pos - 1});
            }
          }
        }
        if (c == 0) continue;
        if (pack_degree(lead_raw) > pack_degree(raw) || !packed_divides(lead_raw, raw, nvars_))
          throw std::domain_error("divide_exact: division not exact");
        quo.emplace_back(raw - lead_raw, c / lead_c);
        if (dtrail > 0) {
          const std::uint32_t qi = static_cast<std::uint32_t>(quo.size()) - 1;
          const std::uint64_t nraw = quo.back().first + dr[dtrail - 1];
          heap.push({order_key(nraw), nraw, qi, dtrail - 1});
        }
      }
    }
    for (auto it = quo.rbegin(); it != quo.rend(); ++it)
      quotient.terms_.emplace_hint(quotient.terms_.end(), unpack_raw(it->first, nvars_),
                                   std::move(it->second));
    return quotient;
  }

  std::vector<std::pair<const Monomial*, const Rational*>> dividend, div;
  dividend.reserve(terms_.size());
  for (const auto& [m, c] : terms_) dividend.emplace_back(&m, &c);
  div.reserve(divisor.terms_.size());
  for (const auto& [m, c] : divisor.terms_) div.emplace_back(&m, &c);
  const Monomial& lead_m = *div.back().first;
  const Rational& lead_c = *div.back().second;
  const std::uint32_t dtrail = static_cast<std::uint32_t>(div.size()) - 1;  // below the lead

  // quotient terms in descending discovery order
  std::vector<std::pair<Monomial, Rational>> quo;
  std::priority_queue<DivStream, std::vector<DivStream>, DivStreamLess> heap;
  heap.push({*dividend.back().first, static_cast<std::uint32_t>(dividend.size()) - 1, 0, true});

  while (!heap.empty()) {
    Monomial m = heap.top().mono;
    Rational c = 0;
    while (!heap.empty() && heap.top().mono == m) {
      const DivStream s = heap.top();
      heap.pop();
      if (s.from_dividend) {
        c += *dividend[s.qi].second;
        if (s.qi > 0) heap.push({*dividend[s.qi - 1].first, s.qi - 1, 0, true});
      } else {
        c -= quo[s.qi].second * *div[s.di].second;
        if (s.di > 0) heap.push({quo[s.qi].first * *div[s.di - 1].first, s.qi, s.di - 1, false});
      }
    }
    if (c == 0) continue;
    if (!lead_m.divides(m)) throw std::domain_error("divide_exact: division not exact");
    quo.emplace_back(lead_m.quotient_of(m), c / lead_c);
    if (dtrail > 0) {
      const std::uint32_t qi = static_cast<std::uint32_t>(quo.size()) - 1;
      heap.push({quo.back().first * *div[dtrail - 1].first, qi, dtrail - 1, false});
    }
  }
  for (auto it = quo.rbegin(); it != quo.rend(); ++it)
    quotient.terms_.emplace_hint(quotient.terms_.end(), std::move(it->first),
                                 std::move(it->second));
  return quotient;
}

double Polynomial::max_coeff_abs() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) {
    double a = std::abs(to_double(c));
    if (a > m) m = a;
  }
  return m;
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // print leading (highest) terms first
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const Rational& c = it->second;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    Rational a = c < 0 ? Rational(-c) : c;
    const bool unit = (a == 1) && !it->first.is_one();
    if (!unit) os << rational_to_string(a);
    if (!it->first.is_one()) {
      if (!unit) os << "*";
      os << monomial_to_string(it->first, names);
    }
    first = false;
  }
  return os.str();
}

}  // namespace shapecert
