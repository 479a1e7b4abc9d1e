#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shapecert/formation.hpp"
#include "shapecert/psatz.hpp"

// vendored single-header json
#include "json.hpp"

namespace shapecert::io {

using Json = nlohmann::ordered_json;

/// Malformed input files raise this; the CLI maps it to exit code 64.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// On-disk description of a semialgebraic problem. Coefficients are
/// num/den int64 pairs; larger exact values refuse to serialize rather
/// than silently losing precision.
struct ProblemFile {
  std::size_t nvars = 0;
  std::vector<std::string> var_names;
  std::vector<Polynomial> f, g, h;

  SemialgebraicSet to_set() const;
  static ProblemFile from_set(const SemialgebraicSet& set, std::vector<std::string> names = {});
};

Json problem_to_json(const ProblemFile& p);
ProblemFile problem_from_json(const Json& j);
void write_problem(const ProblemFile& p, const std::string& path);
ProblemFile read_problem(const std::string& path);

/// FNV-1a 64 over the canonical serialized problem; ties certificates to
/// their inputs.
std::string problem_hash(const ProblemFile& p);

Json certificate_to_json(const Refutation& r, std::size_t nvars, const std::string& input_hash);
Refutation certificate_from_json(const Json& j, std::size_t nvars);
void write_certificate(const Refutation& r, std::size_t nvars, const std::string& input_hash,
                       const std::string& path);
/// Returns the refutation plus the recorded input hash.
std::pair<Refutation, std::string> read_certificate(const std::string& path, std::size_t nvars);

/// CSV with mandatory header: time, positions, |e|, potential.
void write_trajectory_csv(const SimulationResult& sim, const FormationSpec& spec,
                          const std::string& path);

Json equilibrium_report_to_json(const EquilibriumReport& rep);

/// Convenience reader for text like "x^2*y + 3/2*x - 1". JSON stays the
/// canonical format.
Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& var_names);

std::string version_string();

}  // namespace shapecert::io
