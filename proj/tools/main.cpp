#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapecert/formation.hpp"
#include "shapecert/io.hpp"
#include "shapecert/parallel.hpp"
#include "shapecert/psatz.hpp"
#include "shapecert/sos.hpp"

namespace {

using namespace shapecert;

constexpr int kExitFound = 0;
constexpr int kExitNotFound = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

double env_tol(const char* name, double fallback) {
  if (const char* v = std::getenv(name)) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed " << name << "='" << v << "'\n";
    }
  }
  return fallback;
}

std::vector<Rational> parse_rational_list(const std::string& csv) {
  std::vector<Rational> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(rational_from_string(tok));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<std::pair<int, int>> parse_edges(const std::string& text) {
  // "1-2,1-3,..." with 1-based agent labels
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos)
      throw io::ParseError("edge '" + tok + "' must look like i-j");
    const int i = std::stoi(tok.substr(0, dash));
    const int j = std::stoi(tok.substr(dash + 1));
    out.emplace_back(std::min(i, j) - 1, std::max(i, j) - 1);
  }
  return out;
}

struct SpecFlags {
  int agents = 0;
  std::string dbar_sq;
  std::string edges;

  FormationSpec build() const {
    FormationSpec spec;
    spec.n = agents;
    spec.dim = 2;
    spec.dbar_sq = parse_rational_list(dbar_sq);
    if (edges.empty()) {
      for (int i = 0; i < agents; ++i)
        for (int j = i + 1; j < agents; ++j) spec.edges.emplace_back(i, j);
    } else {
      spec.edges = parse_edges(edges);
    }
    spec.validate();
    return spec;
  }
};

void add_spec_flags(CLI::App* cmd, SpecFlags& flags) {
  cmd->add_option("--agents", flags.agents, "number of agents")->required();
  cmd->add_option("--dbar-sq", flags.dbar_sq,
                  "desired squared distances, one rational per edge, e.g. 1,2,1,1,2,1")
      ->required();
  cmd->add_option("--edges", flags.edges,
                  "edge list like 1-2,1-3 (1-based); defaults to the complete graph");
}

Polynomial single_polynomial(const io::ProblemFile& pf) {
  std::vector<const Polynomial*> all;
  for (const auto& p : pf.f) all.push_back(&p);
  for (const auto& p : pf.g) all.push_back(&p);
  for (const auto& p : pf.h) all.push_back(&p);
  if (all.size() != 1)
    throw io::ParseError("expected a problem file containing exactly one polynomial, found " +
                         std::to_string(all.size()));
  return *all[0];
}

SearchSchedule make_schedule(int max_degree, int max_power, int depth) {
  SearchSchedule sched;
  sched.multiplier_degrees.clear();
  for (int d = 0; d <= max_degree; d += 2) sched.multiplier_degrees.push_back(d);
  sched.monoid_powers.clear();
  for (int m = 1; m <= max_power; ++m) sched.monoid_powers.push_back(m);
  sched.cone_depth = depth;
  sched.validate();
  return sched;
}

int run_certify(const io::ProblemFile& pf, const SearchSchedule& sched,
                const SearchOptions& opts, const std::string& out_path, bool json_out) {
  SemialgebraicSet set = pf.to_set();
  SearchResult res = search_refutation(set, sched, opts);
  io::Json attempts = io::Json::array();
  for (const auto& a : res.attempts) {
    io::Json ja;
    ja["degree"] = a.degree;
    ja["monoid_power"] = a.monoid_power;
    ja["status"] = a.status;
    ja["residual"] = a.residual;
    ja["iterations"] = a.iterations;
    attempts.push_back(ja);
    if (!json_out)
      std::cout << "attempt deg=" << a.degree << " m=" << a.monoid_power << ": " << a.status
                << "\n";
  }
  if (!res.found()) {
    if (json_out) {
      io::Json j;
      j["found"] = false;
      j["attempts"] = attempts;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "no refutation found at the scheduled degrees\n";
    }
    return kExitNotFound;
  }
  VerificationReport rep = verify_refutation(set, *res.refutation, opts.certificate_tol);
  if (!rep.pass) {
    std::cerr << "internal error: certificate failed independent verification: " << rep.detail
              << "\n";
    return kExitInternal;
  }
  if (!out_path.empty())
    io::write_certificate(*res.refutation, set.nvars, io::problem_hash(pf), out_path);
  if (json_out) {
    io::Json j;
    j["found"] = true;
    j["identity_residual"] = res.refutation->identity_residual;
    j["monoid_power"] = res.refutation->monoid_power;
    j["attempts"] = attempts;
    if (!out_path.empty()) j["certificate"] = out_path;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "refutation found: identity residual " << res.refutation->identity_residual
              << ", monoid power " << res.refutation->monoid_power << "\n";
    if (!out_path.empty()) std::cout << "certificate written to " << out_path << "\n";
  }
  return kExitFound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "shapecert: sum-of-squares and Positivstellensatz certificates for distance-based "
      "formation shape control"};
  app.require_subcommand(1);

  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads for batch kernels and schedule attempts");

  SolveOptions solve_defaults;
  solve_defaults.feas_tol = env_tol("SHAPECERT_FEAS_TOL", 1e-8);
  solve_defaults.psd_tol = env_tol("SHAPECERT_PSD_TOL", 1e-8);

  // --- sos-check ---------------------------------------------------------
  auto* sos_cmd = app.add_subcommand("sos-check", "test a polynomial for a sum-of-squares "
                                                  "decomposition");
  std::string sos_path, sos_expr, sos_vars;
  int sos_degree = -1;
  bool sos_json = false;
  sos_cmd->add_option("problem", sos_path, "problem JSON containing one polynomial");
  sos_cmd->add_option("--expr", sos_expr, "polynomial text, e.g. 'x^2*y + 3/2'");
  sos_cmd->add_option("--vars", sos_vars, "comma-separated variable names for --expr");
  sos_cmd->add_option("--degree", sos_degree, "override the Gram basis half-degree");
  sos_cmd->add_flag("--json", sos_json, "machine-readable output");

  // --- certify -----------------------------------------------------------
  auto* cert_cmd =
      app.add_subcommand("certify", "search for a bounded-degree emptiness refutation");
  std::string cert_path, cert_out;
  int cert_max_degree = 2, cert_depth = 1, cert_power = 2, cert_max_iters = 0;
  bool cert_json = false;
  cert_cmd->add_option("problem", cert_path, "semialgebraic problem JSON")->required();
  cert_cmd->add_option("--max-degree", cert_max_degree, "largest multiplier degree (even ladder)");
  cert_cmd->add_option("--depth", cert_depth, "cone product depth");
  cert_cmd->add_option("--monoid-power", cert_power, "largest monoid power m");
  cert_cmd->add_option("--max-iters", cert_max_iters, "solver iteration cap per attempt");
  cert_cmd->add_option("--out", cert_out, "write the certificate JSON here");
  cert_cmd->add_flag("--json", cert_json, "machine-readable output");

  // --- verify ------------------------------------------------------------
  auto* verify_cmd =
      app.add_subcommand("verify", "independently verify an emitted certificate (no solver)");
  std::string verify_problem, verify_cert;
  double verify_tol = 1e-8;
  verify_cmd->add_option("problem", verify_problem, "semialgebraic problem JSON")->required();
  verify_cmd->add_option("certificate", verify_cert, "certificate JSON")->required();
  verify_cmd->add_option("--tol", verify_tol, "identity residual / PSD tolerance");

  // --- formation ---------------------------------------------------------
  auto* form_cmd = app.add_subcommand("formation", "distance-based formation shape control");
  form_cmd->require_subcommand(1);

  auto* build_cmd = form_cmd->add_subcommand(
      "build-set", "construct the locally-stable-incorrect-equilibrium emptiness problem");
  SpecFlags build_spec;
  add_spec_flags(build_cmd, build_spec);
  std::string build_mode = "reduced", build_out = "problem.json";
  bool build_no_gauge = false, build_force = false, build_parametric = false;
  build_cmd->add_option("--mode", build_mode, "minor selection: reduced | full")
      ->check(CLI::IsMember({"reduced", "full"}));
  build_cmd->add_flag("--no-gauge", build_no_gauge, "keep the translation/rotation freedoms");
  build_cmd->add_flag("--force", build_force, "override the full-minor size cap");
  build_cmd->add_flag("--parametric", build_parametric,
                      "treat the desired squared distances as variables (4 agents)");
  build_cmd->add_option("--out", build_out, "output problem JSON path");

  auto* sim_cmd = form_cmd->add_subcommand("simulate", "integrate the gradient flow (RK4)");
  SpecFlags sim_spec;
  add_spec_flags(sim_cmd, sim_spec);
  std::string sim_init, sim_out = "trajectory.csv", sim_report;
  std::uint64_t sim_seed = 1;
  bool sim_random = false;
  SimulateOptions sim_opts;
  sim_cmd->add_option("--init", sim_init, "initial coordinates x1,y1,x2,y2,...");
  sim_cmd->add_flag("--random", sim_random, "random initial configuration in [-2,2]^2n");
  sim_cmd->add_option("--seed", sim_seed, "random seed for --random");
  sim_cmd->add_option("--step", sim_opts.step, "RK4 step size");
  sim_cmd->add_option("--max-time", sim_opts.max_time, "simulation horizon");
  sim_cmd->add_option("--eq-tol", sim_opts.eq_tol, "equilibrium tolerance on |flow|");
  sim_cmd->add_option("--record-every", sim_opts.record_every, "trajectory sampling stride");
  sim_cmd->add_option("--out", sim_out, "trajectory CSV path");
  sim_cmd->add_option("--report", sim_report, "terminal equilibrium report JSON path");

  auto* classify_cmd =
      form_cmd->add_subcommand("classify", "classify an equilibrium configuration");
  SpecFlags cls_spec;
  add_spec_flags(classify_cmd, cls_spec);
  std::string cls_at;
  ClassifyTolerances cls_tols;
  classify_cmd->add_option("--at", cls_at, "configuration x1,y1,x2,y2,...")->required();
  classify_cmd->add_option("--eq-tol", cls_tols.eq_tol, "equilibrium tolerance on |flow|");
  classify_cmd->add_option("--err-tol", cls_tols.err_tol, "correct-shape tolerance on |e|");
  classify_cmd->add_option("--zero-tol", cls_tols.zero_tol, "eigenvalue zero tolerance");

  auto* fcert_cmd = form_cmd->add_subcommand(
      "certify", "build the emptiness problem and search for a refutation");
  SpecFlags fcert_spec;
  add_spec_flags(fcert_cmd, fcert_spec);
  std::string fcert_mode = "reduced", fcert_out = "certificate.json", fcert_problem_out;
  bool fcert_no_gauge = false, fcert_force = false, fcert_json = false;
  int fcert_max_degree = 0, fcert_depth = 1, fcert_power = 1, fcert_max_iters = 0;
  fcert_cmd->add_option("--mode", fcert_mode, "minor selection: reduced | full")
      ->check(CLI::IsMember({"reduced", "full"}));
  fcert_cmd->add_flag("--no-gauge", fcert_no_gauge, "keep the translation/rotation freedoms");
  fcert_cmd->add_flag("--force", fcert_force, "override the full-minor size cap");
  fcert_cmd->add_option("--max-degree", fcert_max_degree, "largest multiplier degree");
  fcert_cmd->add_option("--depth", fcert_depth, "cone product depth");
  fcert_cmd->add_option("--monoid-power", fcert_power, "largest monoid power m");
  fcert_cmd->add_option("--max-iters", fcert_max_iters, "solver iteration cap per attempt");
  fcert_cmd->add_option("--out", fcert_out, "certificate JSON path");
  fcert_cmd->add_option("--problem-out", fcert_problem_out, "also write the built problem JSON");
  fcert_cmd->add_flag("--json", fcert_json, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  set_thread_count(jobs);
  const Exec exec = jobs > 1 ? Exec::Parallel : Exec::Serial;

  try {
    if (*sos_cmd) {
      Polynomial f(0);
      std::vector<std::string> names;
      if (!sos_expr.empty()) {
        std::stringstream ss(sos_vars);
        std::string tok;
        while (std::getline(ss, tok, ',')) names.push_back(tok);
        if (names.empty()) throw io::ParseError("--expr requires --vars");
        f = io::parse_polynomial(sos_expr, names);
      } else if (!sos_path.empty()) {
        io::ProblemFile pf = io::read_problem(sos_path);
        names = pf.var_names;
        f = single_polynomial(pf);
      } else {
        throw io::ParseError("sos-check needs a problem file or --expr");
      }
      SosOptions opts;
      opts.solve = solve_defaults;
      opts.solve.exec = exec;
      if (sos_degree >= 0) opts.basis_half_degree = sos_degree;
      SosResult res = sos_check(f, opts);
      if (sos_json) {
        io::Json j;
        j["feasible"] = res.feasible;
        j["reason"] = res.reason;
        if (res.feasible) {
          j["residual"] = res.decomposition.residual;
          j["rounded_rational"] = res.decomposition.rounded_rational;
          io::Json sq = io::Json::array();
          for (const auto& s : res.decomposition.squares) sq.push_back(s.to_string(names));
          j["squares"] = sq;
        }
        std::cout << j.dump(2) << "\n";
      } else if (res.feasible) {
        std::cout << "sum of squares: yes ("
                  << (res.decomposition.rounded_rational ? "exact rational Gram"
                                                         : "floating Gram")
                  << ", residual " << res.decomposition.residual << ")\n";
        for (const auto& s : res.decomposition.squares)
          std::cout << "  square: " << s.to_string(names) << "\n";
      } else {
        std::cout << "sum of squares: unknown (" << res.reason << ")\n";
      }
      return res.feasible ? kExitFound : kExitNotFound;
    }

    if (*cert_cmd) {
      io::ProblemFile pf = io::read_problem(cert_path);
      SearchOptions opts;
      opts.sos.solve = solve_defaults;
      if (cert_max_iters > 0) opts.sos.solve.max_iters = cert_max_iters;
      opts.exec = exec;
      opts.parallel_attempts = jobs > 1;
      return run_certify(pf, make_schedule(cert_max_degree, cert_power, cert_depth), opts,
                         cert_out, cert_json);
    }

    if (*verify_cmd) {
      io::ProblemFile pf = io::read_problem(verify_problem);
      auto [refutation, recorded_hash] = io::read_certificate(verify_cert, pf.nvars);
      const std::string actual_hash = io::problem_hash(pf);
      if (!recorded_hash.empty() && recorded_hash != actual_hash)
        std::cerr << "warning: certificate was produced for a different input ("
                  << recorded_hash << " vs " << actual_hash << ")\n";
      VerificationReport rep = verify_refutation(pf.to_set(), refutation, verify_tol);
      std::cout << "identity residual: " << rep.identity_residual << "\n";
      for (std::size_t i = 0; i < rep.multiplier_min_eigs.size(); ++i)
        std::cout << "cone multiplier " << i << " min eigenvalue: " << rep.multiplier_min_eigs[i]
                  << "\n";
      std::cout << (rep.pass ? "PASS" : "FAIL") << (rep.detail.empty() ? "" : ": " + rep.detail)
                << "\n";
      return rep.pass ? kExitFound : kExitNotFound;
    }

    if (*build_cmd) {
      FormationSpec spec = build_spec.build();
      SetBuildOptions opts;
      opts.mode = build_mode == "full" ? MinorMode::Full : MinorMode::Reduced;
      opts.gauge = !build_no_gauge;
      opts.force_full = build_force;
      opts.exec = exec;
      BuiltSet built =
          build_parametric ? build_parametric_set(spec, opts) : build_semialgebraic_set(spec, opts);
      io::ProblemFile pf = io::ProblemFile::from_set(built.set, built.var_names);
      io::write_problem(pf, build_out);
      std::cout << "wrote " << build_out << ": " << built.set.nvars << " variables, "
                << built.set.h_list.size() << " equations, " << built.set.g_list.size()
                << " inequation(s), " << built.set.f_list.size() << " inequalities\n";
      return kExitFound;
    }

    if (*sim_cmd) {
      FormationSpec spec = sim_spec.build();
      Configuration p0(spec.coords());
      if (sim_random) {
        SplitMix64 rng = stream_rng(sim_seed, 0);
        for (int i = 0; i < spec.coords(); ++i) p0[i] = rng.next_in(-2.0, 2.0);
      } else if (!sim_init.empty()) {
        std::vector<double> vals = parse_double_list(sim_init);
        if (static_cast<int>(vals.size()) != spec.coords())
          throw io::ParseError("--init needs " + std::to_string(spec.coords()) + " coordinates");
        for (int i = 0; i < spec.coords(); ++i) p0[i] = vals[static_cast<std::size_t>(i)];
      } else {
        throw io::ParseError("simulate needs --init or --random");
      }
      SimulationResult sim = simulate(p0, spec, sim_opts);
      io::write_trajectory_csv(sim, spec, sim_out);
      std::cout << "steps: " << sim.steps << ", terminal |flow| " << sim.terminal_rhs_norm
                << (sim.converged   ? " (equilibrium)"
                    : sim.diverged ? " (diverged)"
                                   : " (horizon)")
                << "\n";
      if (sim.report)
        std::cout << "classification: " << sim.report->classification << ", |e| "
                  << sim.report->error_norm << "\n";
      std::cout << "wrote " << sim_out << "\n";
      if (!sim_report.empty()) {
        io::Json j;
        j["converged"] = sim.converged;
        j["diverged"] = sim.diverged;
        j["steps"] = sim.steps;
        j["terminal_rhs_norm"] = sim.terminal_rhs_norm;
        j["max_phi_increase"] = sim.max_phi_increase;
        j["centroid_drift"] = sim.centroid_drift;
        j["terminal"] =
            std::vector<double>(sim.terminal.data(), sim.terminal.data() + sim.terminal.size());
        if (sim.report) j["report"] = io::equilibrium_report_to_json(*sim.report);
        std::ofstream os(sim_report);
        if (!os) throw std::runtime_error("cannot open " + sim_report);
        os << j.dump(2) << "\n";
        std::cout << "wrote " << sim_report << "\n";
      }
      return kExitFound;
    }

    if (*classify_cmd) {
      FormationSpec spec = cls_spec.build();
      std::vector<double> vals = parse_double_list(cls_at);
      if (static_cast<int>(vals.size()) != spec.coords())
        throw io::ParseError("--at needs " + std::to_string(spec.coords()) + " coordinates");
      Configuration p(spec.coords());
      for (int i = 0; i < spec.coords(); ++i) p[i] = vals[static_cast<std::size_t>(i)];
      EquilibriumReport rep = classify_equilibrium(p, spec, cls_tols);
      std::cout << io::equilibrium_report_to_json(rep).dump(2) << "\n";
      return kExitFound;
    }

    if (*fcert_cmd) {
      FormationSpec spec = fcert_spec.build();
      SetBuildOptions bopts;
      bopts.mode = fcert_mode == "full" ? MinorMode::Full : MinorMode::Reduced;
      bopts.gauge = !fcert_no_gauge;
      bopts.force_full = fcert_force;
      bopts.exec = exec;
      BuiltSet built = build_semialgebraic_set(spec, bopts);
      io::ProblemFile pf = io::ProblemFile::from_set(built.set, built.var_names);
      if (!fcert_problem_out.empty()) io::write_problem(pf, fcert_problem_out);
      if (!fcert_json)
        std::cout << "emptiness problem: " << built.set.nvars << " variables, "
                  << built.set.h_list.size() << " equations, " << built.set.g_list.size()
                  << " inequation(s), " << built.set.f_list.size() << " inequalities\n";
      SearchOptions opts;
      opts.sos.solve = solve_defaults;
      if (fcert_max_iters > 0) opts.sos.solve.max_iters = fcert_max_iters;
      opts.exec = exec;
      opts.parallel_attempts = jobs > 1;
      return run_certify(pf, make_schedule(fcert_max_degree, fcert_power, fcert_depth), opts,
                         fcert_out, fcert_json);
    }
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
