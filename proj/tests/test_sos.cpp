#include "doctest.h"

#include <algorithm>
#include <random>

#include "shapecert/sos.hpp"

using namespace shapecert;

namespace {

Polynomial var(std::size_t nvars, std::size_t i) { return Polynomial::variable(nvars, i); }
Polynomial cst(std::size_t nvars, int c) { return Polynomial::constant(nvars, c); }

Polynomial motzkin() {
  // x^4 y^2 + x^2 y^4 - 3 x^2 y^2 + 1 : nonnegative but not a sum of squares
  auto x = var(2, 0), y = var(2, 1);
  return x.pow(4) * y.pow(2) + x.pow(2) * y.pow(4) - (x.pow(2) * y.pow(2)).scaled(3) + cst(2, 1);
}

Polynomial random_cubic(std::mt19937& rng, std::size_t nvars) {
  std::uniform_int_distribution<int> coeff(-2, 2);
  Polynomial p(nvars);
  for (const auto& m : monomial_basis(nvars, 3)) p.add_term(m, coeff(rng));
  return p;
}

}  // namespace

TEST_CASE("sos_check: perfect square") {
  auto x = var(2, 0), y = var(2, 1);
  Polynomial f = x * x + (x * y).scaled(2) + y * y;  // (x+y)^2
  SosResult res = sos_check(f);
  REQUIRE(res.feasible);
  REQUIRE(!res.decomposition.squares.empty());
  DecompositionReport rep = verify_decomposition(f, res.decomposition, 1e-6);
  CHECK(rep.pass);
  // homogeneous: basis is the degree-1 slice [x, y]
  REQUIRE(res.decomposition.z.size() == 2);
  CHECK(res.decomposition.z[0] == Monomial{1, 0});
  CHECK(res.decomposition.z[1] == Monomial{0, 1});
  // essentially one square proportional to x + y
  const Polynomial& s0 = res.decomposition.squares[0];
  const double cx = to_double(s0.coefficient(Monomial{1, 0}));
  const double cy = to_double(s0.coefficient(Monomial{0, 1}));
  CHECK(cx == doctest::Approx(cy).epsilon(1e-6));
}

TEST_CASE("sos_check: x^2 + y^2 with identity Gram") {
  auto x = var(2, 0), y = var(2, 1);
  SosResult res = sos_check(x * x + y * y);
  REQUIRE(res.feasible);
  CHECK(res.decomposition.rounded_rational);
  REQUIRE(res.decomposition.z.size() == 2);
  CHECK(res.decomposition.q_rational[0][0] == Rational(1));
  CHECK(res.decomposition.q_rational[1][1] == Rational(1));
  CHECK(res.decomposition.q_rational[0][1] == Rational(0));
}

TEST_CASE("sos_check: Motzkin polynomial is Unknown") {
  SosResult res = sos_check(motzkin());
  CHECK(!res.feasible);
  CHECK(!res.reason.empty());
}

TEST_CASE("sos_check: odd degree short-circuits") {
  auto x = var(1, 0);
  SosResult res = sos_check(x * x * x + x);
  CHECK(!res.feasible);
  CHECK(res.reason.find("odd degree") != std::string::npos);
}

TEST_CASE("sos_check: zero polynomial is an empty sum") {
  SosResult res = sos_check(Polynomial::zero(2));
  CHECK(res.feasible);
  CHECK(res.decomposition.squares.empty());
}

TEST_CASE("soundness: feasible implies nonnegative on samples") {
  auto x = var(2, 0), y = var(2, 1);
  Polynomial f = (x - y.scaled(2)).pow(2) + (x * y - cst(2, 1)).pow(2);
  SosResult res = sos_check(f);
  REQUIRE(res.feasible);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    double pt[2] = {u(rng), u(rng)};
    CHECK(f.evaluate(pt) >= -1e-6);
  }
}

TEST_CASE("round trip: sums of random squares decompose") {
  std::mt19937 rng(2025);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t nvars = 1 + trial % 3;
    const int k = 1 + trial % 4;
    Polynomial f(nvars);
    for (int i = 0; i < k; ++i) {
      Polynomial s = random_cubic(rng, nvars);
      f += s * s;
    }
    if (f.is_zero()) continue;
    SosResult res = sos_check(f);
    REQUIRE_MESSAGE(res.feasible, "trial ", trial, ": ", res.reason);
    DecompositionReport rep = verify_decomposition(f, res.decomposition, 1e-6);
    CHECK_MESSAGE(rep.pass, "residual ", rep.max_coeff_residual, " min_eig ", rep.min_eig);
  }
}

TEST_CASE("homogeneous inputs use the form-degree slice") {
  auto x = var(2, 0), y = var(2, 1);
  Polynomial f = (x * x + y * y).pow(2);
  SosResult res = sos_check(f);
  REQUIRE(res.feasible);
  REQUIRE(res.decomposition.z.size() == 3);  // [x^2, xy, y^2]
  for (const auto& m : res.decomposition.z) CHECK(m.degree() == 2);
}

TEST_CASE("gram_matching reproduces the quartic-form constraint structure") {
  // z = [x^2, y^2, xy] with the template a1 x^4 + a2 x^3 y + a3 x^2 y^2 +
  // a4 x y^3 + a5 y^4 gives exactly:
  //   q11 = a1, 2q13 = a2, q33 + 2q12 = a3, 2q23 = a4, q22 = a5
  PolynomialTemplate tmpl;
  tmpl[Monomial{4, 0}] = LinExpr::of_unknown(0);
  tmpl[Monomial{3, 1}] = LinExpr::of_unknown(1);
  tmpl[Monomial{2, 2}] = LinExpr::of_unknown(2);
  tmpl[Monomial{1, 3}] = LinExpr::of_unknown(3);
  tmpl[Monomial{0, 4}] = LinExpr::of_unknown(4);
  MonomialVector z = {Monomial{2, 0}, Monomial{0, 2}, Monomial{1, 1}};
  std::vector<MatchingConstraint> cons = gram_matching(tmpl, z);
  REQUIRE(cons.size() == 5);

  std::vector<std::string> rendered;
  for (const auto& c : cons) rendered.push_back(matching_constraint_to_string(c));
  std::vector<std::string> expected = {
      "q11 = a1", "2q13 = a2", "q33+2q12 = a3", "2q23 = a4", "q22 = a5"};
  for (const auto& e : expected)
    CHECK_MESSAGE(std::find(rendered.begin(), rendered.end(), e) != rendered.end(),
                  "missing constraint: ", e);
}

TEST_CASE("sos_with_affine: the quartic example") {
  PolynomialTemplate tmpl;
  tmpl[Monomial{4, 0}] = LinExpr::of_unknown(0);
  tmpl[Monomial{3, 1}] = LinExpr::of_unknown(1);
  tmpl[Monomial{2, 2}] = LinExpr::of_unknown(2);
  tmpl[Monomial{1, 3}] = LinExpr::of_unknown(3);
  tmpl[Monomial{0, 4}] = LinExpr::of_unknown(4);

  auto fix = [](int k, int v) {
    AffineRow row;
    row.coeffs[k] = 1;
    row.rhs = v;
    return row;
  };

  SUBCASE("a = (1,0,2,0,1): F = (x^2+y^2)^2 is SOS") {
    std::vector<AffineRow> rows = {fix(0, 1), fix(1, 0), fix(2, 2), fix(3, 0), fix(4, 1)};
    SosAffineResult res = sos_with_affine(tmpl, rows);
    REQUIRE(res.feasible);
    auto x = var(2, 0), y = var(2, 1);
    CHECK(res.realized == (x * x + y * y).pow(2));
    DecompositionReport rep = verify_decomposition(res.realized, res.decomposition, 1e-6);
    CHECK(rep.pass);
  }

  SUBCASE("a1 = -1, rest 0: -x^4 is not SOS") {
    std::vector<AffineRow> rows = {fix(0, -1), fix(1, 0), fix(2, 0), fix(3, 0), fix(4, 0)};
    SosAffineResult res = sos_with_affine(tmpl, rows);
    CHECK(!res.feasible);
  }

  SUBCASE("indefinite x^4 - 3x^2y^2 + y^4 is not SOS") {
    std::vector<AffineRow> rows = {fix(0, 1), fix(1, 0), fix(2, -3), fix(3, 0), fix(4, 1)};
    SosAffineResult res = sos_with_affine(tmpl, rows);
    CHECK(!res.feasible);  // F(1,1) = -1 < 0
  }

  SUBCASE("contradictory constraints are Unknown with a diagnostic") {
    std::vector<AffineRow> rows = {fix(0, 1), fix(0, 2)};
    SosAffineResult res = sos_with_affine(tmpl, rows);
    CHECK(!res.feasible);
    CHECK(res.reason.find("inconsistent") != std::string::npos);
  }
}

TEST_CASE("extract_squares examples") {
  MonomialVector z = {Monomial{1, 0}, Monomial{0, 1}};  // [x, y]
  SUBCASE("identity Gram gives x and y") {
    std::vector<Polynomial> sq = extract_squares(Eigen::MatrixXd::Identity(2, 2), z, 2);
    REQUIRE(sq.size() == 2);
    Polynomial sum(2);
    for (const auto& s : sq) sum += s * s;
    CHECK((sum - (var(2, 0).pow(2) + var(2, 1).pow(2))).max_coeff_abs() <= 1e-12);
  }
  SUBCASE("rank one gives x + y") {
    Eigen::MatrixXd q(2, 2);
    q << 1, 1, 1, 1;
    std::vector<Polynomial> sq = extract_squares(q, z, 2);
    REQUIRE(sq.size() == 1);
    Polynomial sum = sq[0] * sq[0];
    Polynomial expect = (var(2, 0) + var(2, 1)).pow(2);
    CHECK((sum - expect).max_coeff_abs() <= 1e-12);
  }
  SUBCASE("diag(4, 0) over [x, 1] gives 2x") {
    MonomialVector z2 = {Monomial{1}, Monomial{0}};
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
    q(0, 0) = 4;
    std::vector<Polynomial> sq = extract_squares(q, z2, 1);
    REQUIRE(sq.size() == 1);
    CHECK((sq[0] - Polynomial::variable(1, 0).scaled(2)).max_coeff_abs() <= 1e-12);
  }
  SUBCASE("indefinite Gram throws") {
    Eigen::MatrixXd q(2, 2);
    q << 1, 0, 0, -1;
    CHECK_THROWS_AS(extract_squares(q, z, 2), std::invalid_argument);
  }
}

TEST_CASE("verify_decomposition flags corruption") {
  auto x = var(2, 0), y = var(2, 1);
  Polynomial f = x * x + (x * y).scaled(2) + y * y;
  SosResult res = sos_check(f);
  REQUIRE(res.feasible);
  DecompositionReport good = verify_decomposition(f, res.decomposition, 1e-6);
  CHECK(good.pass);

  // perturb a square coefficient by 1e-3: detectable
  GramDecomposition bad = res.decomposition;
  REQUIRE(!bad.squares.empty());
  bad.squares[0].add_term(Monomial{1, 0}, Rational(1, 1000));
  DecompositionReport rep = verify_decomposition(f, bad, 1e-6);
  CHECK(!rep.pass);
  CHECK(rep.max_coeff_residual > 1e-6);

  // Gram with min eig -1 fails the PSD side
  GramDecomposition indef = res.decomposition;
  indef.q = -Eigen::MatrixXd::Identity(2, 2);
  DecompositionReport rep2 = verify_decomposition(f, indef, 1e-6);
  CHECK(!rep2.pass);
}
