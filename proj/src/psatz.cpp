#include "shapecert/psatz.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace shapecert {

namespace {

std::string subset_name(const std::vector<int>& subset) {
  if (subset.empty()) return "p0";
  std::string s = "p";
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += "_";
    s += std::to_string(subset[i] + 1);
  }
  return s;
}

// subsets of {0..s-1} with size <= depth, ordered by (size, lex)
std::vector<std::vector<int>> cone_subsets(int s, int depth) {
  std::vector<std::vector<int>> out{{}};
  std::vector<std::vector<int>> layer{{}};
  for (int size = 1; size <= depth; ++size) {
    std::vector<std::vector<int>> next;
    for (const auto& base : layer) {
      const int start = base.empty() ? 0 : base.back() + 1;
      for (int i = start; i < s; ++i) {
        auto ext = base;
        ext.push_back(i);
        next.push_back(std::move(ext));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

Polynomial product_over(const SemialgebraicSet& set, const std::vector<int>& subset) {
  Polynomial acc = Polynomial::constant(set.nvars, 1);
  for (int i : subset) acc = acc * set.f_list[static_cast<std::size_t>(i)];
  return acc;
}

}  // namespace

void SemialgebraicSet::validate() const {
  auto check = [&](const std::vector<Polynomial>& list, const char* which) {
    for (const auto& p : list)
      if (p.nvars() != nvars)
        throw std::invalid_argument(std::string("semialgebraic set: ") + which +
                                    " polynomial has wrong variable count");
  };
  check(f_list, "f");
  check(g_list, "g");
  check(h_list, "h");
}

Polynomial SemialgebraicSet::monoid_element(int m) const {
  Polynomial g = Polynomial::constant(nvars, 1);
  if (g_list.empty()) return g;  // empty product
  if (m < 1) throw std::invalid_argument("monoid power must be >= 1");
  for (const auto& gi : g_list) g = g * gi.pow(static_cast<unsigned>(2 * m));
  return g;
}

void SearchSchedule::validate() const {
  if (multiplier_degrees.empty()) throw std::invalid_argument("schedule: empty degree ladder");
  int prev = -1;
  for (int d : multiplier_degrees) {
    if (d < 0 || d % 2 != 0) throw std::invalid_argument("schedule: degrees must be even and >= 0");
    if (d < prev) throw std::invalid_argument("schedule: degrees must be non-decreasing");
    prev = d;
  }
  if (monoid_powers.empty()) throw std::invalid_argument("schedule: empty monoid power list");
  for (int m : monoid_powers)
    if (m < 1) throw std::invalid_argument("schedule: monoid powers must be >= 1");
  if (cone_depth < 0) throw std::invalid_argument("schedule: negative cone depth");
}

RefutationProgram build_refutation_program(const SemialgebraicSet& set, int deg, int m,
                                           int depth) {
  set.validate();
  if (deg < 0 || deg % 2 != 0)
    throw std::invalid_argument("build_refutation_program: multiplier degree must be even");
  if (!set.g_list.empty() && m < 1)
    throw std::invalid_argument("build_refutation_program: monoid power must be >= 1");
  if (depth < 0 || depth > static_cast<int>(set.f_list.size()))
    throw std::invalid_argument("build_refutation_program: depth out of range");

  RefutationProgram prog;
  ProgramSymbols& sym = prog.symbols;
  sym.g_squared = set.g_list.empty() ? Polynomial::constant(set.nvars, 1)
                                     : set.monoid_element(m).pow(2);

  // degree budget: identity degree covers every assembled term
  std::vector<std::vector<int>> subsets = cone_subsets(static_cast<int>(set.f_list.size()), depth);
  std::vector<Polynomial> products;
  products.reserve(subsets.size());
  int max_product_deg = 0;
  for (const auto& s : subsets) {
    Polynomial prod = product_over(set, s);
    max_product_deg = std::max(max_product_deg, std::max(prod.degree(), 0));
    products.push_back(std::move(prod));
  }
  sym.deg_total = std::max(deg + max_product_deg, std::max(sym.g_squared.degree(), 0));
  if (sym.deg_total > 64)
    throw std::invalid_argument("build_refutation_program: total identity degree exceeds guard");

  // one Gram block per cone term
  std::vector<std::size_t> kept_subsets;
  for (std::size_t si = 0; si < subsets.size(); ++si) {
    const Polynomial& prod = products[si];
    if (prod.is_zero()) {
      sym.warnings.push_back("cone product " + subset_name(subsets[si]) +
                             " is identically zero; term omitted");
      continue;
    }
    const int budget = sym.deg_total - prod.degree();
    if (budget < 0) {
      sym.warnings.push_back("degree budget excludes cone term " + subset_name(subsets[si]));
      continue;
    }
    MonomialVector basis = monomial_basis(set.nvars, budget / 2);
    prog.sdp.blocks.push_back({subset_name(subsets[si]), static_cast<int>(basis.size())});
    sym.block_subsets.push_back(subsets[si]);
    sym.block_bases.push_back(std::move(basis));
    kept_subsets.push_back(si);
  }

  // free scalar coefficients of the ideal multipliers
  for (std::size_t hi = 0; hi < set.h_list.size(); ++hi) {
    const Polynomial& h = set.h_list[hi];
    if (h.is_zero()) {
      sym.warnings.push_back("equation h" + std::to_string(hi + 1) + " is identically zero");
      continue;
    }
    const int budget = sym.deg_total - h.degree();
    if (budget < 0) continue;
    for (const auto& mono : monomial_basis(set.nvars, budget))
      sym.free_meta.emplace_back(static_cast<int>(hi), mono);
  }
  prog.sdp.free_vars = static_cast<int>(sym.free_meta.size());

  // coefficient matching: every monomial of f + g^2 + h vanishes
  std::map<Monomial, AffineConstraint, GradedLexLess> rows;
  for (std::size_t block_idx = 0; block_idx < kept_subsets.size(); ++block_idx) {
    const Polynomial& prod = products[kept_subsets[block_idx]];
    const MonomialVector& basis = sym.block_bases[block_idx];
    const int block = static_cast<int>(block_idx);
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i; j < basis.size(); ++j) {
        const Monomial pair_mono = basis[i] * basis[j];
        const Rational mult(i == j ? 1 : 2);
        for (const auto& [mono, coeff] : prod.terms())
          rows[pair_mono * mono].matrix_terms.push_back(
              {{block, static_cast<int>(i), static_cast<int>(j)}, mult * coeff});
      }
  }
  for (std::size_t v = 0; v < sym.free_meta.size(); ++v) {
    const auto& [hi, mono] = sym.free_meta[v];
    for (const auto& [hm, hc] : set.h_list[static_cast<std::size_t>(hi)].terms())
      rows[mono * hm].free_terms.push_back({static_cast<int>(v), hc});
  }
  for (const auto& [mono, coeff] : sym.g_squared.terms()) rows[mono].rhs -= coeff;

  prog.sdp.constraints.reserve(rows.size());
  for (auto& [mono, row] : rows) {
    (void)mono;
    prog.sdp.constraints.push_back(std::move(row));
  }
  return prog;
}

namespace {

Refutation assemble_refutation(const SemialgebraicSet& set, int m, const ProgramSymbols& sym,
                               const SdpSolution& sol, const SearchOptions& options) {
  // small-denominator rounding first; exact dyadic image as the fallback
  auto build_terms = [&](bool rounded) -> std::optional<Refutation> {
    Refutation cand;
    cand.monoid_power = m;
    cand.cone_terms.clear();
    cand.ideal_multipliers.assign(set.h_list.size(), Polynomial::zero(set.nvars));
    for (std::size_t b = 0; b < sym.block_subsets.size(); ++b) {
      ConeTerm term;
      term.subset = sym.block_subsets[b];
      term.gram.z = sym.block_bases[b];
      const Eigen::MatrixXd q = 0.5 * (sol.block_values[b] + sol.block_values[b].transpose());
      term.gram.q = q;
      const std::size_t n = static_cast<std::size_t>(q.rows());
      term.gram.q_rational.assign(n, std::vector<Rational>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          Rational v;
          if (rounded) {
            auto rr = round_to_rational(q(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)),
                                        options.sos.round_den_cap);
            if (!rr) return std::nullopt;
            v = *rr;
          } else {
            v = rational_from_double(q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
          }
          term.gram.q_rational[i][j] = v;
          term.gram.q_rational[j][i] = v;
        }
      term.gram.rounded_rational = rounded;
      term.multiplier = gram_form(term.gram.q_rational, term.gram.z, set.nvars);
      cand.cone_terms.push_back(std::move(term));
    }
    for (std::size_t v = 0; v < sym.free_meta.size(); ++v) {
      const auto& [hi, mono] = sym.free_meta[v];
      const double val = sol.free_values[static_cast<Eigen::Index>(v)];
      Rational coeff;
      if (rounded) {
        auto rr = round_to_rational(val, options.sos.round_den_cap);
        if (!rr) return std::nullopt;
        coeff = *rr;
      } else {
        coeff = rational_from_double(val);
      }
      cand.ideal_multipliers[static_cast<std::size_t>(hi)].add_term(mono, coeff);
    }
    // exact identity residual
    Polynomial identity = sym.g_squared;
    for (const auto& term : cand.cone_terms)
      identity += term.multiplier * product_over(set, term.subset);
    for (std::size_t hi = 0; hi < set.h_list.size(); ++hi)
      identity += cand.ideal_multipliers[hi] * set.h_list[hi];
    cand.identity_residual = identity.max_coeff_abs();
    return cand;
  };

  std::optional<Refutation> rounded = build_terms(true);
  if (rounded && rounded->identity_residual <= options.certificate_tol) {
    // squares for reporting
    for (auto& t : rounded->cone_terms)
      t.gram.squares = extract_squares(t.gram.q, t.gram.z, set.nvars, options.sos.solve.psd_tol);
    return *rounded;
  }
  std::optional<Refutation> dyadic = build_terms(false);
  Refutation out = *dyadic;
  for (auto& t : out.cone_terms)
    t.gram.squares = extract_squares(t.gram.q, t.gram.z, set.nvars, options.sos.solve.psd_tol);
  return out;
}

}  // namespace

SearchResult search_refutation(const SemialgebraicSet& set, const SearchSchedule& schedule,
                               const SearchOptions& options) {
  set.validate();
  schedule.validate();
  SearchResult result;

  struct Attempt {
    int deg;
    int m;
  };
  std::vector<Attempt> attempts;
  for (int d : schedule.multiplier_degrees) {
    if (set.g_list.empty()) {
      attempts.push_back({d, 1});
    } else {
      for (int m : schedule.monoid_powers) attempts.push_back({d, m});
    }
  }
  // increasing cost: identity degree first, then multiplier degree, then power
  int g_deg_sum = 0;
  for (const auto& g : set.g_list) g_deg_sum += std::max(g.degree(), 0);
  std::vector<int> f_degs;
  for (const auto& f : set.f_list) f_degs.push_back(std::max(f.degree(), 0));
  std::sort(f_degs.rbegin(), f_degs.rend());
  int max_prod = 0;
  for (int i = 0; i < std::min<int>(schedule.cone_depth, static_cast<int>(f_degs.size())); ++i)
    max_prod += f_degs[static_cast<std::size_t>(i)];
  auto cost = [&](const Attempt& a) {
    const int gdeg = set.g_list.empty() ? 0 : 4 * a.m * g_deg_sum;
    return std::max(a.deg + max_prod, gdeg);
  };
  std::stable_sort(attempts.begin(), attempts.end(), [&](const Attempt& a, const Attempt& b) {
    if (cost(a) != cost(b)) return cost(a) < cost(b);
    if (a.deg != b.deg) return a.deg < b.deg;
    return a.m < b.m;
  });

  auto run_attempt = [&](const Attempt& attempt, AttemptLog& log) -> std::optional<Refutation> {
    log.degree = attempt.deg;
    log.monoid_power = attempt.m;
    try {
      const int depth = std::min<int>(schedule.cone_depth, static_cast<int>(set.f_list.size()));
      RefutationProgram prog = build_refutation_program(set, attempt.deg, attempt.m, depth);
      SolveOptions solve_opts = options.sos.solve;
      solve_opts.exec = options.parallel_attempts ? Exec::Serial : options.exec;
      SolveStatus status = solve(prog.sdp, solve_opts);
      log.iterations = status.iterations;
      log.residual = status.solution.residual;
      if (status.feasible()) {
        Refutation cand =
            assemble_refutation(set, attempt.m, prog.symbols, status.solution, options);
        VerificationReport rep = verify_refutation(set, cand, options.certificate_tol);
        if (!rep.pass) {
          // one retry at tighter tolerance
          solve_opts.feas_tol /= 100.0;
          solve_opts.psd_tol /= 10.0;
          SolveStatus retry = solve(prog.sdp, solve_opts);
          if (retry.feasible()) {
            cand = assemble_refutation(set, attempt.m, prog.symbols, retry.solution, options);
            rep = verify_refutation(set, cand, options.certificate_tol);
          }
        }
        if (rep.pass) {
          log.status = "found";
          log.residual = cand.identity_residual;
          return cand;
        }
        log.status = "feasible but failed verification (residual " +
                     std::to_string(rep.identity_residual) + ")";
      } else {
        log.status = "not found: " + status.diagnostic;
      }
    } catch (const std::exception& e) {
      log.status = std::string("error: ") + e.what();
    }
    return std::nullopt;
  };

  if (options.parallel_attempts) {
    // evaluate every attempt, then pick the first hit in schedule order
    std::vector<AttemptLog> logs(attempts.size());
    std::vector<std::optional<Refutation>> hits(attempts.size());
    for_each_index(Exec::Parallel, static_cast<std::ptrdiff_t>(attempts.size()),
                   [&](std::ptrdiff_t i) {
                     hits[static_cast<std::size_t>(i)] =
                         run_attempt(attempts[static_cast<std::size_t>(i)],
                                     logs[static_cast<std::size_t>(i)]);
                   });
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      result.attempts.push_back(logs[i]);
      if (hits[i] && !result.refutation) {
        result.refutation = std::move(hits[i]);
        break;
      }
    }
    return result;
  }

  for (const auto& attempt : attempts) {
    AttemptLog log;
    if (auto hit = run_attempt(attempt, log)) {
      result.attempts.push_back(log);
      result.refutation = std::move(hit);
      return result;
    }
    result.attempts.push_back(log);
  }
  return result;
}

VerificationReport verify_refutation(const SemialgebraicSet& set, const Refutation& r,
                                     double tol) {
  VerificationReport rep;
  set.validate();
  bool structural_ok = true;
  std::ostringstream detail;

  if (!r.cone_terms.empty() && !r.cone_terms.front().subset.empty()) {
    structural_ok = false;
    detail << "empty cone product p0 missing; ";
  }
  if (r.cone_terms.empty()) {
    structural_ok = false;
    detail << "no cone terms; ";
  }
  if (r.ideal_multipliers.size() != set.h_list.size()) {
    structural_ok = false;
    detail << "ideal multiplier count mismatch; ";
  }
  for (const auto& term : r.cone_terms) {
    int prev = -1;
    for (int idx : term.subset) {
      if (idx <= prev || idx >= static_cast<int>(set.f_list.size())) {
        structural_ok = false;
        detail << "bad cone subset; ";
        break;
      }
      prev = idx;
    }
  }
  if (!set.g_list.empty() && r.monoid_power < 1) {
    structural_ok = false;
    detail << "monoid power must be >= 1; ";
  }
  if (!structural_ok) {
    rep.pass = false;
    rep.detail = detail.str();
    return rep;
  }

  // rebuild the identity from scratch, exactly
  Polynomial identity = set.g_list.empty() ? Polynomial::constant(set.nvars, 1)
                                           : set.monoid_element(r.monoid_power).pow(2);
  for (const auto& term : r.cone_terms) {
    const Polynomial p = gram_form(term.gram.q_rational, term.gram.z, set.nvars);
    identity += p * product_over(set, term.subset);
    Eigen::MatrixXd q(static_cast<Eigen::Index>(term.gram.q_rational.size()),
                      static_cast<Eigen::Index>(term.gram.q_rational.size()));
    for (std::size_t i = 0; i < term.gram.q_rational.size(); ++i)
      for (std::size_t j = 0; j < term.gram.q_rational.size(); ++j)
        q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            to_double(term.gram.q_rational[i][j]);
    rep.multiplier_min_eigs.push_back(q.rows() ? min_eigenvalue(q) : 0.0);
  }
  for (std::size_t hi = 0; hi < set.h_list.size(); ++hi)
    identity += r.ideal_multipliers[hi] * set.h_list[hi];

  rep.identity_residual = identity.max_coeff_abs();
  rep.pass = rep.identity_residual <= tol;
  for (double e : rep.multiplier_min_eigs)
    if (e < -tol) rep.pass = false;
  if (!rep.pass && rep.identity_residual > tol)
    detail << "identity residual " << rep.identity_residual << " exceeds " << tol << "; ";
  for (std::size_t i = 0; i < rep.multiplier_min_eigs.size(); ++i)
    if (rep.multiplier_min_eigs[i] < -tol)
      detail << "cone multiplier " << i << " indefinite (min eig " << rep.multiplier_min_eigs[i]
             << "); ";
  rep.detail = detail.str();
  return rep;
}

WitnessScan scan_for_witness(const SemialgebraicSet& set, std::int64_t npoints,
                             std::uint64_t seed, double lo, double hi, double tol, Exec exec) {
  set.validate();
  WitnessScan out;
  out.points_checked = npoints;
  std::vector<char> hits(static_cast<std::size_t>(npoints), 0);
  for_each_index(exec, static_cast<std::ptrdiff_t>(npoints), [&](std::ptrdiff_t i) {
    SplitMix64 rng = stream_rng(seed, static_cast<std::uint64_t>(i));
    std::vector<double> pt(set.nvars);
    for (auto& x : pt) x = rng.next_in(lo, hi);
    for (const auto& f : set.f_list)
      if (f.evaluate(pt) < -tol) return;
    for (const auto& g : set.g_list)
      if (std::abs(g.evaluate(pt)) <= tol) return;
    for (const auto& h : set.h_list)
      if (std::abs(h.evaluate(pt)) > tol) return;
    hits[static_cast<std::size_t>(i)] = 1;
  });
  for (std::int64_t i = 0; i < npoints; ++i) {
    if (hits[static_cast<std::size_t>(i)]) {
      out.witness_found = true;
      SplitMix64 rng = stream_rng(seed, static_cast<std::uint64_t>(i));
      out.witness.resize(set.nvars);
      for (auto& x : out.witness) x = rng.next_in(lo, hi);
      break;
    }
  }
  return out;
}

}  // namespace shapecert
