#include "doctest.h"

#include "shapecert/psatz.hpp"

using namespace shapecert;

namespace {

Polynomial var(std::size_t nvars, std::size_t i) { return Polynomial::variable(nvars, i); }
Polynomial cst(std::size_t nvars, int c) { return Polynomial::constant(nvars, c); }

SemialgebraicSet circle_plus_one_set() {
  // h: x^2 + 1 = 0 over the reals: empty
  SemialgebraicSet set;
  set.nvars = 1;
  set.h_list = {var(1, 0) * var(1, 0) + cst(1, 1)};
  return set;
}

SemialgebraicSet sign_conflict_set() {
  // f: x >= 0 and -x - 1 >= 0: empty
  SemialgebraicSet set;
  set.nvars = 1;
  set.f_list = {var(1, 0), -var(1, 0) - cst(1, 1)};
  return set;
}

SemialgebraicSet inequation_set() {
  // g: x != 0 with h: x^2 = 0: empty
  SemialgebraicSet set;
  set.nvars = 1;
  set.g_list = {var(1, 0)};
  set.h_list = {var(1, 0) * var(1, 0)};
  return set;
}

}  // namespace

TEST_CASE("monoid element and the empty-product convention") {
  SemialgebraicSet set;
  set.nvars = 1;
  CHECK(set.monoid_element(1) == cst(1, 1));  // empty g_list: g = 1
  set.g_list = {var(1, 0)};
  // g = x^(2m)
  CHECK(set.monoid_element(1) == var(1, 0).pow(2));
  CHECK(set.monoid_element(2) == var(1, 0).pow(4));
  CHECK_THROWS_AS(set.monoid_element(0), std::invalid_argument);
}

TEST_CASE("build_refutation_program: {x^2 + 1 = 0} at degree 2") {
  RefutationProgram prog = build_refutation_program(circle_plus_one_set(), 2, 1, 0);
  // one Gram block for p0, free vars for q1 up to degree 2
  REQUIRE(prog.sdp.blocks.size() == 1);
  CHECK(prog.symbols.deg_total == 2);
  CHECK(prog.sdp.blocks[0].dim == 2);  // basis [1, x]
  CHECK(prog.sdp.free_vars == 1);      // q1 constant (deg_total - deg h = 0)
  CHECK(prog.symbols.g_squared == cst(1, 1));
  SolveStatus st = solve(prog.sdp);
  REQUIRE(st.feasible());
  // solutions form the family q1 = -t, p0 = (t-1) + t x^2 for t >= 1; the
  // hand certificate q1 = -1, p0 = x^2 is its extreme point
  const double q1 = st.solution.free_values[0];
  CHECK(q1 <= -1.0 + 1e-6);
  const Eigen::MatrixXd& q = st.solution.block_values[0];
  CHECK(q(1, 1) == doctest::Approx(-q1).epsilon(1e-6));          // x^2 match
  CHECK(q(0, 0) == doctest::Approx(-q1 - 1.0).epsilon(1e-5));    // constant match
}

TEST_CASE("build_refutation_program: degree/depth validation") {
  SemialgebraicSet set = sign_conflict_set();
  CHECK_THROWS_AS(build_refutation_program(set, 3, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_refutation_program(set, 2, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_refutation_program(inequation_set(), 2, 0, 0), std::invalid_argument);
}

TEST_CASE("search_refutation: the three canonical empty sets") {
  SearchOptions opts;
  SearchSchedule sched;

  SUBCASE("{x^2 + 1 = 0}") {
    sched.multiplier_degrees = {2};
    SearchResult res = search_refutation(circle_plus_one_set(), sched, opts);
    REQUIRE(res.found());
    CHECK(res.refutation->identity_residual <= 1e-8);
    VerificationReport rep = verify_refutation(circle_plus_one_set(), *res.refutation, 1e-8);
    CHECK(rep.pass);
  }

  SUBCASE("{x >= 0, -x-1 >= 0} at degree 0, depth 1") {
    sched.multiplier_degrees = {0};
    sched.cone_depth = 1;
    SearchResult res = search_refutation(sign_conflict_set(), sched, opts);
    REQUIRE(res.found());
    CHECK(res.refutation->identity_residual <= 1e-8);
    VerificationReport rep = verify_refutation(sign_conflict_set(), *res.refutation, 1e-8);
    CHECK(rep.pass);
    // hand certificate structure: p0 + p1 x + p2 (-x-1) + 1 = 0
    CHECK(res.refutation->cone_terms.size() == 3);
    CHECK(res.refutation->cone_terms.front().subset.empty());
  }

  SUBCASE("{x != 0, x^2 = 0} with m = 1") {
    sched.multiplier_degrees = {0, 2};
    SearchResult res = search_refutation(inequation_set(), sched, opts);
    REQUIRE(res.found());
    CHECK(res.refutation->monoid_power == 1);
    CHECK(res.refutation->identity_residual <= 1e-8);
    VerificationReport rep = verify_refutation(inequation_set(), *res.refutation, 1e-8);
    CHECK(rep.pass);
  }
}

TEST_CASE("search_refutation: nonempty set stays NotFound") {
  // {x >= 0} is nonempty; no certificate can exist at any degree
  SemialgebraicSet set;
  set.nvars = 1;
  set.f_list = {var(1, 0)};
  SearchSchedule sched;
  sched.multiplier_degrees = {0, 2, 4};
  SearchResult res = search_refutation(set, sched);
  CHECK(!res.found());
  CHECK(res.attempts.size() == 3);
  for (const auto& a : res.attempts) CHECK(a.status.find("not found") == 0);
}

TEST_CASE("search_refutation: disk away from a line") {
  // f: 1 - x^2 - y^2 >= 0, h: x + y - 10 = 0 cannot meet
  SemialgebraicSet set;
  set.nvars = 2;
  auto x = var(2, 0), y = var(2, 1);
  set.f_list = {cst(2, 1) - x * x - y * y};
  set.h_list = {x + y - cst(2, 10)};
  SearchSchedule sched;  // defaults: degrees {0,2}, depth 1
  SearchResult res = search_refutation(set, sched);
  REQUIRE(res.found());
  VerificationReport rep = verify_refutation(set, *res.refutation, 1e-8);
  CHECK(rep.pass);
  // soundness: no sampled point satisfies the set
  WitnessScan scan = scan_for_witness(set, 100000, 42, -3.0, 3.0, 1e-6);
  CHECK(!scan.witness_found);
}

TEST_CASE("verify_refutation: hand certificate and corruptions") {
  SemialgebraicSet set = circle_plus_one_set();
  // hand-built: p0 = x^2 (Gram [[0,0],[0,1]] over [1,x]), q1 = -1
  Refutation r;
  r.monoid_power = 1;
  ConeTerm p0;
  p0.subset = {};
  p0.gram.z = {Monomial{0}, Monomial{1}};
  p0.gram.q_rational = {{0, 0}, {0, 1}};
  p0.gram.q = Eigen::MatrixXd::Zero(2, 2);
  p0.gram.q(1, 1) = 1.0;
  p0.multiplier = var(1, 0) * var(1, 0);
  r.cone_terms.push_back(p0);
  r.ideal_multipliers = {cst(1, -1)};

  VerificationReport rep = verify_refutation(set, r, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.identity_residual == 0.0);

  SUBCASE("corrupted ideal multiplier changes the constant term by one") {
    Refutation bad = r;
    bad.ideal_multipliers = {cst(1, -2)};
    VerificationReport rep2 = verify_refutation(set, bad, 1e-8);
    CHECK(!rep2.pass);
    CHECK(rep2.identity_residual == doctest::Approx(1.0));
  }

  SUBCASE("non-PSD Gram block fails") {
    Refutation bad = r;
    bad.cone_terms[0].gram.q_rational = {{Rational(-1), Rational(0)}, {Rational(0), Rational(1)}};
    VerificationReport rep2 = verify_refutation(set, bad, 1e-8);
    CHECK(!rep2.pass);
  }

  SUBCASE("structural mismatch is rejected") {
    Refutation bad = r;
    bad.cone_terms[0].subset = {7};
    VerificationReport rep2 = verify_refutation(set, bad, 1e-8);
    CHECK(!rep2.pass);
  }
}

TEST_CASE("determinism: repeated search gives identical certificates") {
  SearchSchedule sched;
  sched.multiplier_degrees = {2};
  SearchResult r1 = search_refutation(circle_plus_one_set(), sched);
  SearchResult r2 = search_refutation(circle_plus_one_set(), sched);
  REQUIRE(r1.found());
  REQUIRE(r2.found());
  CHECK(r1.refutation->identity_residual == r2.refutation->identity_residual);
  REQUIRE(r1.refutation->cone_terms.size() == r2.refutation->cone_terms.size());
  for (std::size_t i = 0; i < r1.refutation->cone_terms.size(); ++i)
    CHECK(r1.refutation->cone_terms[i].multiplier == r2.refutation->cone_terms[i].multiplier);
  for (std::size_t i = 0; i < r1.refutation->ideal_multipliers.size(); ++i)
    CHECK(r1.refutation->ideal_multipliers[i] == r2.refutation->ideal_multipliers[i]);
}

TEST_CASE("soundness scan finds witnesses of nonempty sets") {
  SemialgebraicSet set;
  set.nvars = 1;
  set.f_list = {var(1, 0)};
  WitnessScan scan = scan_for_witness(set, 1000, 7, -3.0, 3.0, 1e-6);
  CHECK(scan.witness_found);
  REQUIRE(scan.witness.size() == 1);
  CHECK(scan.witness[0] >= -1e-6);
}

TEST_CASE("schedule validation") {
  SearchSchedule bad;
  bad.multiplier_degrees = {3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.multiplier_degrees = {2, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.multiplier_degrees = {0};
  bad.monoid_powers = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
