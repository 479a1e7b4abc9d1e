#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapecert/parallel.hpp"
#include "shapecert/polynomial.hpp"
#include "shapecert/sos.hpp"

namespace shapecert {

/// { x : f_i(x) >= 0, g_i(x) != 0, h_i(x) = 0 }. Empty lists are allowed;
/// an empty g_list means the monoid is just {1}.
struct SemialgebraicSet {
  std::size_t nvars = 0;
  std::vector<Polynomial> f_list;
  std::vector<Polynomial> g_list;
  std::vector<Polynomial> h_list;

  void validate() const;

  /// g = prod g_i^(2m); the empty product is 1.
  Polynomial monoid_element(int m) const;
};

/// Infeasibility certificate: cone element (SOS multipliers over products of
/// the f_i), monoid power, and ideal multipliers with f + g^2 + h = 0.
struct ConeTerm {
  std::vector<int> subset;  // ascending indices into f_list; empty for p_0
  GramDecomposition gram;
  Polynomial multiplier;  // p_S = z^T Q z, from the rational Gram entries
};

struct Refutation {
  int monoid_power = 1;
  std::vector<ConeTerm> cone_terms;  // the empty subset is always present, first
  std::vector<Polynomial> ideal_multipliers;  // q_i, one per h_i (may be zero)
  double identity_residual = 0.0;  // max |coefficient| of f + g^2 + h
};

/// Degree/power grid for the refutation search.
struct SearchSchedule {
  std::vector<int> multiplier_degrees = {0, 2};  // even, non-decreasing
  std::vector<int> monoid_powers = {1, 2};
  int cone_depth = 1;  // max size of cone product subsets

  void validate() const;
};

/// Bookkeeping that maps SDP variables back to certificate pieces.
struct ProgramSymbols {
  std::vector<std::vector<int>> block_subsets;
  std::vector<MonomialVector> block_bases;
  std::vector<std::pair<int, Monomial>> free_meta;  // free var -> (h index, monomial)
  Polynomial g_squared;
  int deg_total = 0;
  std::vector<std::string> warnings;
};

struct RefutationProgram {
  SdpFeasibilityProblem sdp;
  ProgramSymbols symbols;
};

/// Assemble the coefficient-matching SDP for multipliers of degree `deg`,
/// monoid power m and cone products up to `depth` factors.
RefutationProgram build_refutation_program(const SemialgebraicSet& set, int deg, int m, int depth);

struct AttemptLog {
  int degree = 0;
  int monoid_power = 0;
  std::string status;
  double residual = 0.0;
  int iterations = 0;
};

struct SearchOptions {
  SosOptions sos;                  // solver tolerances + rounding cap
  double certificate_tol = 1e-8;   // identity residual gate after rounding
  Exec exec = Exec::Serial;
  bool parallel_attempts = false;  // run schedule entries concurrently
};

struct SearchResult {
  std::optional<Refutation> refutation;
  std::vector<AttemptLog> attempts;

  bool found() const { return refutation.has_value(); }
};

/// Walk the (degree, power) grid in increasing cost order; the first solve
/// that is feasible and survives independent verification wins.
SearchResult search_refutation(const SemialgebraicSet& set, const SearchSchedule& schedule,
                               const SearchOptions& options = {});

struct VerificationReport {
  double identity_residual = 0.0;
  std::vector<double> multiplier_min_eigs;
  bool pass = false;
  std::string detail;
};

/// Recomputes f + g^2 + h from scratch with exact arithmetic and checks the
/// Gram spectra; independent of the solver path.
VerificationReport verify_refutation(const SemialgebraicSet& set, const Refutation& r, double tol);

struct WitnessScan {
  bool witness_found = false;
  std::vector<double> witness;
  std::int64_t points_checked = 0;
};

/// Random sampling check that a claimed-empty set really has no obvious
/// points: a witness satisfies f_i >= -tol, |g_i| > tol, |h_i| <= tol.
WitnessScan scan_for_witness(const SemialgebraicSet& set, std::int64_t npoints,
                             std::uint64_t seed, double lo, double hi, double tol,
                             Exec exec = Exec::Serial);

}  // namespace shapecert
