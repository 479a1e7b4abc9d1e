// Acceptance suite: one pass/fail line per criterion, exit nonzero on any
// failure. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "shapecert/formation.hpp"
#include "shapecert/io.hpp"
#include "shapecert/parallel.hpp"
#include "shapecert/psatz.hpp"
#include "shapecert/sos.hpp"

using namespace shapecert;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!pass) ++failures;
}

FormationSpec unit_square() { return FormationSpec::complete(4, {1, 2, 1, 1, 2, 1}); }
FormationSpec equilateral() { return FormationSpec::complete(3, {1, 1, 1}); }

Configuration random_config(std::uint64_t seed, std::uint64_t stream, int n) {
  SplitMix64 rng = stream_rng(seed, stream);
  Configuration p(2 * n);
  for (int i = 0; i < 2 * n; ++i) p[i] = rng.next_in(-2.0, 2.0);
  return p;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --- 1: the three flow formulations agree --------------------------------
void criterion1() {
  const auto t0 = Clock::now();
  FormationSpec sq = unit_square();
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Configuration p = random_config(101, static_cast<std::uint64_t>(k), 4);
    Eigen::VectorXd a = flow_rhs(p, sq);
    worst = std::max(worst, (a - flow_rhs_rigidity(p, sq)).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (a - flow_rhs_weight_matrix(p, sq)).lpNorm<Eigen::Infinity>());
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "flow formulations agree to " << worst << " over 1000 configurations in " << elapsed
     << " s";
  report(1, worst <= 1e-12 && elapsed < 5.0, os.str());
}

// --- 2: gradient/Hessian against finite differences and symbols ----------
void criterion2() {
  FormationSpec sq = unit_square();
  double grad_err = 0.0, hess_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    Configuration p = random_config(202, static_cast<std::uint64_t>(k), 4);
    const Eigen::VectorXd rhs = flow_rhs(p, sq);
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    for (int j = 0; j < 8; ++j) {
      Configuration pp = p, pm = p;
      pp[j] += 1e-6;
      pm[j] -= 1e-6;
      const double grad_fd = (potential(pp, sq) - potential(pm, sq)) / 2e-6;
      grad_err = std::max(grad_err, std::abs(-grad_fd - rhs[j]) / scale);
    }
    const Eigen::MatrixXd h = hessian(p, sq);
    const double hscale = std::max(1.0, h.lpNorm<Eigen::Infinity>());
    for (int j = 0; j < 8; ++j) {
      Configuration pp = p, pm = p;
      pp[j] += 1e-5;
      pm[j] -= 1e-5;
      Eigen::VectorXd col = -(flow_rhs(pp, sq) - flow_rhs(pm, sq)) / 2e-5;
      hess_err = std::max(hess_err, (h.col(j) - col).lpNorm<Eigen::Infinity>() / hscale);
    }
  }
  bool symbolic_ok = true;
  const Polynomial phi = potential_polynomial(sq);
  const SquareMatrix<Polynomial> hsym = hessian_polynomial(sq);
  for (std::size_t a = 0; a < 8 && symbolic_ok; ++a)
    for (std::size_t b = 0; b < 8 && symbolic_ok; ++b)
      symbolic_ok = hsym.at(a, b) == phi.differentiate(a).differentiate(b);
  std::ostringstream os;
  os << "gradient rel err " << grad_err << ", Hessian rel err " << hess_err
     << ", symbolic identity " << (symbolic_ok ? "exact" : "BROKEN");
  report(2, grad_err <= 1e-5 && hess_err <= 1e-5 && symbolic_ok, os.str());
}

// --- 3: conservation along trajectories ----------------------------------
void criterion3() {
  FormationSpec sq = unit_square();
  SimulateOptions opts;
  opts.step = 1e-3;
  opts.max_time = 100.0;  // 1e5 steps max
  std::vector<Configuration> inits;
  for (int k = 0; k < 100; ++k) inits.push_back(random_config(303, static_cast<std::uint64_t>(k), 4));
  std::vector<SimulationResult> sims = simulate_batch(inits, sq, opts, Exec::Parallel);
  double worst_drift = 0.0, worst_phi = 0.0;
  for (const auto& sim : sims) {
    worst_drift = std::max(worst_drift, sim.centroid_drift);
    const double slack = 1e-12 * (1.0 + sim.trajectory.front().phi);
    worst_phi = std::max(worst_phi, sim.max_phi_increase - slack);
  }
  std::ostringstream os;
  os << "centroid drift <= " << worst_drift << ", max potential increase beyond slack "
     << worst_phi << " over 100 trajectories";
  report(3, worst_drift <= 1e-9 && worst_phi <= 0.0, os.str());
}

// --- 4: three-agent convergence and collinear instability ----------------
void criterion4() {
  FormationSpec tri = equilateral();
  SimulateOptions opts;
  opts.step = 1e-3;
  opts.max_time = 300.0;
  std::vector<Configuration> inits;
  std::uint64_t stream = 0;
  while (inits.size() < 100) {
    Configuration p = random_config(404, stream++, 3);
    const double cross = (p[2] - p[0]) * (p[5] - p[1]) - (p[4] - p[0]) * (p[3] - p[1]);
    if (std::abs(cross) < 1e-3) continue;  // non-collinear initializations only
    inits.push_back(p);
  }
  std::vector<SimulationResult> sims = simulate_batch(inits, tri, opts, Exec::Parallel);
  int correct = 0;
  for (const auto& sim : sims)
    if (sim.converged && error_vector(sim.terminal, tri).norm() <= 1e-6) ++correct;

  // collinear-constrained runs land on incorrect equilibria with a
  // strictly negative Hessian eigenvalue
  int collinear_ok = 0;
  const int collinear_runs = 20;
  for (int k = 0; k < collinear_runs; ++k) {
    SplitMix64 rng = stream_rng(405, static_cast<std::uint64_t>(k));
    Configuration p(6);
    p << 0.0, 0.0, rng.next_in(0.3, 1.2), 0.0, rng.next_in(1.4, 2.5), 0.0;
    SimulateOptions copts = opts;
    copts.max_time = 2000.0;
    SimulationResult sim = simulate(p, tri, copts);
    if (sim.converged && sim.report && sim.report->classification == "incorrect-unstable" &&
        sim.report->hessian_eigs.front() <= -1e-4)
      ++collinear_ok;
  }
  std::ostringstream os;
  os << correct << "/100 non-collinear runs reach |e| <= 1e-6; " << collinear_ok << "/"
     << collinear_runs << " collinear runs end at incorrect equilibria with eigenvalue <= -1e-4";
  report(4, correct >= 99 && collinear_ok == collinear_runs, os.str());
}

// --- 5: four-agent square: no stable incorrect equilibria observed -------
void criterion5() {
  FormationSpec sq = unit_square();
  SimulateOptions opts;
  opts.step = 1e-3;
  opts.max_time = 100.0;
  std::vector<Configuration> inits;
  for (int k = 0; k < 1000; ++k)
    inits.push_back(random_config(505, static_cast<std::uint64_t>(k), 4));
  std::vector<SimulationResult> sims = simulate_batch(inits, sq, opts, Exec::Parallel);
  int correct = 0, incorrect_unstable = 0, stable_candidates = 0, degenerate = 0, unconverged = 0;
  for (const auto& sim : sims) {
    if (!sim.converged || !sim.report) {
      ++unconverged;
      continue;
    }
    const std::string& c = sim.report->classification;
    if (c == "correct") ++correct;
    else if (c == "incorrect-unstable") ++incorrect_unstable;
    else if (c == "incorrect-stable-candidate") ++stable_candidates;
    else ++degenerate;
  }
  if (stable_candidates > 0)
    std::printf("[FINDING] criterion 5: %d incorrect-stable-candidate equilibria observed - "
                "reportable finding, not a test failure\n",
                stable_candidates);
  std::ostringstream os;
  os << correct << " correct, " << incorrect_unstable << " incorrect-unstable, "
     << stable_candidates << " stable-candidates, " << degenerate << " degenerate, "
     << unconverged << " unconverged of 1000 runs";
  report(5, degenerate == 0, os.str());
}

// --- 6: SOS engine --------------------------------------------------------
Polynomial random_cubic(SplitMix64& rng, std::size_t nvars) {
  Polynomial p(nvars);
  for (const auto& m : monomial_basis(nvars, 3))
    p.add_term(m, static_cast<std::int64_t>(rng.next() % 5) - 2);
  return p;
}

void criterion6() {
  // (a) 50 random sums of <= 4 squares decompose with residual <= 1e-6
  int roundtrip_ok = 0;
  int attempted = 0;
  for (int trial = 0; trial < 50; ++trial) {
    SplitMix64 rng = stream_rng(606, static_cast<std::uint64_t>(trial));
    const std::size_t nvars = 1 + trial % 3;
    const int k = 1 + trial % 4;
    Polynomial f(nvars);
    for (int i = 0; i < k; ++i) {
      Polynomial s = random_cubic(rng, nvars);
      f += s * s;
    }
    if (f.is_zero()) {
      ++roundtrip_ok;  // zero is an empty sum of squares
      ++attempted;
      continue;
    }
    ++attempted;
    SosResult res = sos_check(f);
    if (!res.feasible) continue;
    DecompositionReport rep = verify_decomposition(f, res.decomposition, 1e-6);
    if (rep.pass) ++roundtrip_ok;
  }

  // (b) the Motzkin polynomial has no PSD Gram matrix
  Polynomial mot(2);
  {
    auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    mot = x.pow(4) * y.pow(2) + x.pow(2) * y.pow(4) -
          (x.pow(2) * y.pow(2)).scaled(3) + Polynomial::constant(2, 1);
  }
  const bool motzkin_unknown = !sos_check(mot).feasible;

  // (c) quartic-form matching constraints over z = [x^2, y^2, xy]
  PolynomialTemplate tmpl;
  tmpl[Monomial{4, 0}] = LinExpr::of_unknown(0);
  tmpl[Monomial{3, 1}] = LinExpr::of_unknown(1);
  tmpl[Monomial{2, 2}] = LinExpr::of_unknown(2);
  tmpl[Monomial{1, 3}] = LinExpr::of_unknown(3);
  tmpl[Monomial{0, 4}] = LinExpr::of_unknown(4);
  MonomialVector z = {Monomial{2, 0}, Monomial{0, 2}, Monomial{1, 1}};
  std::vector<MatchingConstraint> cons = gram_matching(tmpl, z);
  std::vector<std::string> rendered;
  for (const auto& c : cons) rendered.push_back(matching_constraint_to_string(c));
  std::sort(rendered.begin(), rendered.end());
  std::vector<std::string> expected = {"2q13 = a2", "2q23 = a4", "q11 = a1", "q22 = a5",
                                       "q33+2q12 = a3"};
  const bool constraints_ok = rendered == expected;

  std::ostringstream os;
  os << roundtrip_ok << "/" << attempted << " square-sum round trips at residual 1e-6; Motzkin "
     << (motzkin_unknown ? "Unknown" : "WRONGLY FEASIBLE") << "; quartic matching constraints "
     << (constraints_ok ? "reproduced" : "MISMATCH");
  report(6, roundtrip_ok == attempted && motzkin_unknown && constraints_ok, os.str());
}

// --- 7: Positivstellensatz engine -----------------------------------------
void criterion7() {
  const auto t0 = Clock::now();
  auto var1 = Polynomial::variable(1, 0);
  auto one = Polynomial::constant(1, 1);

  bool all_ok = true;
  std::ostringstream os;

  {
    SemialgebraicSet set;  // x^2 + 1 = 0
    set.nvars = 1;
    set.h_list = {var1 * var1 + one};
    SearchSchedule sched;
    sched.multiplier_degrees = {2};
    SearchResult res = search_refutation(set, sched);
    const bool ok = res.found() && res.attempts.size() == 1 &&
                    res.refutation->identity_residual <= 1e-8 &&
                    verify_refutation(set, *res.refutation, 1e-8).pass;
    all_ok = all_ok && ok;
    os << "{x^2+1=0} " << (ok ? "found" : "MISSED");
  }
  {
    SemialgebraicSet set;  // x >= 0, -x-1 >= 0
    set.nvars = 1;
    set.f_list = {var1, -var1 - one};
    SearchSchedule sched;
    sched.multiplier_degrees = {0};
    sched.cone_depth = 1;
    SearchResult res = search_refutation(set, sched);
    const bool ok = res.found() && res.attempts.size() == 1 &&
                    res.refutation->identity_residual <= 1e-8 &&
                    verify_refutation(set, *res.refutation, 1e-8).pass;
    all_ok = all_ok && ok;
    os << "; {x>=0,-x-1>=0} " << (ok ? "found" : "MISSED");
  }
  {
    SemialgebraicSet set;  // x != 0, x^2 = 0
    set.nvars = 1;
    set.g_list = {var1};
    set.h_list = {var1 * var1};
    SearchSchedule sched;
    sched.multiplier_degrees = {0, 2};
    SearchResult res = search_refutation(set, sched);
    const bool ok = res.found() && res.attempts.size() == 1 && res.refutation->monoid_power == 1 &&
                    res.refutation->identity_residual <= 1e-8 &&
                    verify_refutation(set, *res.refutation, 1e-8).pass;
    all_ok = all_ok && ok;
    os << "; {x!=0,x^2=0} " << (ok ? "found" : "MISSED");
  }
  {
    SemialgebraicSet set;  // x >= 0 is nonempty
    set.nvars = 1;
    set.f_list = {var1};
    SearchSchedule sched;
    sched.multiplier_degrees = {0, 2, 4};
    SearchResult res = search_refutation(set, sched);
    const bool ok = !res.found() && res.attempts.size() == 3;
    all_ok = all_ok && ok;
    os << "; nonempty {x>=0} " << (ok ? "NotFound at all degrees" : "WRONGLY REFUTED");
  }
  const double elapsed = seconds_since(t0);
  os << "; " << elapsed << " s";
  report(7, all_ok && elapsed < 10.0, os.str());
}

// --- 8: formation certification pipeline (CLI, fresh processes) -----------
int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string path = std::string(SHAPECERT_TEST_DIR) + "/acceptance_cli_out.txt";
  const std::string cmd = std::string(SHAPECERT_CLI_PATH) + " " + args + " > " + path + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

void criterion8() {
  const std::string dir = SHAPECERT_TEST_DIR;
  const std::string problem = dir + "/acceptance_problem.json";
  const std::string cert = dir + "/acceptance_cert.json";

  // the default-depth program assembles well-formed
  BuiltSet built = build_semialgebraic_set(unit_square(), {});
  bool program_ok = false;
  std::size_t blocks = 0, constraints = 0;
  try {
    RefutationProgram prog = build_refutation_program(built.set, 0, 1, 1);
    blocks = prog.sdp.blocks.size();
    constraints = prog.sdp.constraints.size();
    program_ok = blocks == 6 && prog.symbols.deg_total == 10 && constraints == 3003;
  } catch (const std::exception&) {
    program_ok = false;
  }

  // the CLI pipeline runs to completion; success of the search itself is
  // not required (no certificate is expected at this depth/degree)
  std::string out;
  const int rc = run_cli(
      "formation certify --agents 4 --dbar-sq 1,2,1,1,2,1 --mode reduced --max-degree 0 "
      "--depth 0 --monoid-power 1 --max-iters 600 --problem-out " +
          problem + " --out " + cert,
      &out);
  const bool completed = rc == 0 || rc == 2;

  bool counts_ok = false;
  try {
    io::ProblemFile pf = io::read_problem(problem);
    counts_ok = pf.nvars == 5 && pf.h.size() == 8 && pf.g.size() == 1 && pf.f.size() == 5;
    bool degrees_ok = pf.g[0].degree() == 4;
    for (const auto& h : pf.h) degrees_ok = degrees_ok && h.degree() == 3;
    counts_ok = counts_ok && degrees_ok;
  } catch (const std::exception&) {
    counts_ok = false;
  }

  bool emitted_verifies = true;  // vacuous when no certificate may be emitted
  if (rc == 0) {
    std::string vout;
    emitted_verifies = run_cli("verify " + problem + " " + cert + " --tol 1e-8", &vout) == 0;
  }

  std::ostringstream os;
  os << "program counts 5/8/1/5 " << (counts_ok ? "ok" : "WRONG") << "; default-depth assembly "
     << (program_ok ? "well-formed" : "BROKEN") << " (" << blocks << " blocks, " << constraints
     << " matching rows); pipeline exit " << rc
     << (rc == 0 ? (emitted_verifies ? ", emitted certificate verifies" : ", CERTIFICATE INVALID")
                 : " (no certificate found, consistent with the open status)");
  report(8, program_ok && completed && counts_ok && emitted_verifies, os.str());
}

// --- 9: algebraic set and numerical oracle describe the same objects ------
void criterion9() {
  bool ok = true;
  std::ostringstream os;
  SimulateOptions opts;
  opts.max_time = 2000.0;

  struct Witness {
    FormationSpec spec;
    Configuration init;
    const char* label;
  };
  std::vector<Witness> witnesses;
  {
    Configuration tri(6);
    tri << 0.0, 0.0, 0.7, 0.0, 1.9, 0.0;
    witnesses.push_back({equilateral(), tri, "3-agent collinear"});
    Configuration quad(8);
    quad << 0.0, 0.0, 0.9, 0.0, 2.1, 0.0, 3.4, 0.0;
    witnesses.push_back({unit_square(), quad, "4-agent collinear"});
  }
  for (const auto& w : witnesses) {
    SimulationResult sim = simulate(w.init, w.spec, opts);
    if (!sim.converged || !sim.report || sim.report->classification != "incorrect-unstable") {
      ok = false;
      os << w.label << ": no incorrect-unstable equilibrium found; ";
      continue;
    }
    BuiltSet built = build_semialgebraic_set(w.spec, {});
    Configuration aligned = gauge_align(sim.terminal, w.spec.n);
    Eigen::VectorXd gc = gauge_coordinates(aligned, w.spec.n);
    std::vector<double> pt(gc.data(), gc.data() + gc.size());
    double hmax = 0.0, min_minor = 0.0;
    for (const auto& h : built.set.h_list) hmax = std::max(hmax, std::abs(h.evaluate(pt)));
    for (const auto& f : built.set.f_list) min_minor = std::min(min_minor, f.evaluate(pt)); 
    const double gval = built.set.g_list[0].evaluate(pt);
    const bool here = hmax <= 1e-6 && min_minor <= -1e-6 && gval >= 1e-4;
    ok = ok && here;
    os << w.label << ": |h|max " << hmax << ", min minor " << min_minor << ", |e|^2 " << gval
       << "; ";
  }
  report(9, ok, os.str());
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("acceptance: %d/9 criteria passed in %.1f s\n", 9 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
