#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "shapecert/determinant.hpp"
#include "shapecert/parallel.hpp"
#include "shapecert/polynomial.hpp"
#include "shapecert/psatz.hpp"

namespace shapecert {

/// Desired squared inter-agent distances on a graph. Edges are stored as
/// (i, j) with i < j, sorted; the default graph is complete.
struct FormationSpec {
  int n = 0;
  int dim = 2;
  std::vector<std::pair<int, int>> edges;
  std::vector<Rational> dbar_sq;  // one per edge, > 0

  static FormationSpec complete(int n, std::vector<Rational> dbar_sq, int dim = 2);
  void validate() const;

  int coords() const { return n * dim; }
  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Stacked agent positions, length n * dim.
using Configuration = Eigen::VectorXd;

// --- numeric dynamics -------------------------------------------------

/// e_ij = |p_i - p_j|^2 - dbar_ij^2, one entry per edge.
Eigen::VectorXd error_vector(const Configuration& p, const FormationSpec& spec);

/// Phi(p) = 1/4 |e(p)|^2; the flow is its exact negative gradient.
double potential(const Configuration& p, const FormationSpec& spec);

/// Agent-wise equations of motion: pdot_i = sum_j e_ij (p_j - p_i).
Eigen::VectorXd flow_rhs(const Configuration& p, const FormationSpec& spec);

/// Same flow through the rigidity factorization -R(p)^T e(p).
Eigen::VectorXd flow_rhs_rigidity(const Configuration& p, const FormationSpec& spec);

/// Same flow through the weight-matrix form -(E(p) (x) I_dim) p.
Eigen::VectorXd flow_rhs_weight_matrix(const Configuration& p, const FormationSpec& spec);

/// n x n symmetric matrix with diagonal sum_j e_ij and off-diagonal -e_ij
/// on edges (zero for non-edges). Rows sum to zero by construction.
Eigen::MatrixXd e_matrix(const Configuration& p, const FormationSpec& spec);

/// |edges| x (n dim); the row of edge (i,j) carries (p_i - p_j)^T in block i
/// and the negation in block j.
Eigen::MatrixXd rigidity_matrix(const Configuration& p, const FormationSpec& spec);

/// H = 2 R^T R + E (x) I_dim; equals the negative Jacobian of the flow.
Eigen::MatrixXd hessian(const Configuration& p, const FormationSpec& spec);

// --- simulation and classification ------------------------------------

struct SimulateOptions {
  double step = 1e-3;
  double max_time = 1e4;
  double eq_tol = 1e-9;          // stop when |flow| <= eq_tol
  double divergence_bound = 1e6;  // abort when |p|_inf exceeds this
  int record_every = 100;        // trajectory downsampling (first/last always kept)
};

struct TrajectorySample {
  double t = 0.0;
  Configuration p;
  double err_norm = 0.0;
  double phi = 0.0;
};

struct EquilibriumReport {
  Configuration p;
  double rhs_norm = 0.0;
  double error_norm = 0.0;
  std::vector<double> hessian_eigs;  // ascending
  std::string classification;  // correct | incorrect-stable-candidate |
                               // incorrect-unstable | degenerate
};

struct SimulationResult {
  std::vector<TrajectorySample> trajectory;
  Configuration terminal;
  double terminal_rhs_norm = 0.0;
  long steps = 0;
  bool converged = false;
  bool diverged = false;
  double max_phi_increase = 0.0;  // over consecutive accepted steps
  double centroid_drift = 0.0;    // inf-norm drift of the centroid
  std::optional<EquilibriumReport> report;  // present when converged
};

/// Fixed-step RK4 on the gradient flow.
SimulationResult simulate(const Configuration& p0, const FormationSpec& spec,
                          const SimulateOptions& opts = {});

/// Independent runs; parallel lane is bitwise identical to serial.
std::vector<SimulationResult> simulate_batch(const std::vector<Configuration>& inits,
                                             const FormationSpec& spec,
                                             const SimulateOptions& opts, Exec exec);

struct ClassifyTolerances {
  double eq_tol = 1e-9;
  double err_tol = 1e-6;
  double zero_tol = 1e-6;
};

/// Requires |flow_rhs(p)| <= eq_tol. Correct when |e| <= err_tol; otherwise
/// the Hessian spectrum decides (three near-zero eigenvalues are the
/// translational/rotational freedoms in the plane).
EquilibriumReport classify_equilibrium(const Configuration& p, const FormationSpec& spec,
                                       const ClassifyTolerances& tols = {});

// --- symbolic constructions (dim 2) ------------------------------------

/// Variable layout: coordinate c of agent i is variable i*dim + c; in
/// parametric mode the squared-distance unknowns follow, one per edge.
std::vector<Polynomial> error_polynomials(const FormationSpec& spec, bool parametric = false);
Polynomial error_norm_sq_polynomial(const FormationSpec& spec, bool parametric = false);
Polynomial potential_polynomial(const FormationSpec& spec, bool parametric = false);

/// Rows of (E(p) (x) I_dim) p, cubic in the positions.
std::vector<Polynomial> equilibrium_rows(const FormationSpec& spec, bool parametric = false);

/// H as a polynomial matrix, 2 R^T R + E (x) I_dim.
SquareMatrix<Polynomial> hessian_polynomial(const FormationSpec& spec, bool parametric = false);

enum class MinorMode { Reduced, Full };

struct SetBuildOptions {
  MinorMode mode = MinorMode::Reduced;
  bool gauge = true;
  bool force_full = false;  // override the full-minor size cap
  Exec exec = Exec::Serial;
};

struct BuiltSet {
  SemialgebraicSet set;
  std::vector<std::string> var_names;
};

/// The emptiness question "is there a locally stable incorrect equilibrium":
/// h = equilibrium rows, g = |e|^2 != 0, f = principal minors of H (the
/// trailing-block leading minors in reduced mode, all 2^(n dim)-1 in full
/// mode). Gauge fixing substitutes p1 = 0, p2x = 0 and drops 3 variables.
BuiltSet build_semialgebraic_set(const FormationSpec& spec, const SetBuildOptions& opts = {});

/// Four coplanar points must have vanishing bordered determinant of their
/// squared distances; exact in the rationals.
Rational cayley_menger(const std::vector<Rational>& dbar_sq);

/// Same determinant as a polynomial in six squared-distance variables
/// placed at w_offset..w_offset+5 of an nvars ring.
Polynomial cayley_menger_polynomial(std::size_t nvars, std::size_t w_offset);

/// Desired-shape-as-variable version for n = 4: position variables (gauge
/// fixed) plus six squared-distance unknowns; adds k(dbar)=0 to h and
/// positivity of each distance unknown to f.
BuiltSet build_parametric_set(const FormationSpec& spec, const SetBuildOptions& opts = {});

/// Translate + rotate so agent 1 sits at the origin and agent 2 on the
/// positive y axis (p2x = 0).
Configuration gauge_align(const Configuration& p, int n, int dim = 2);

/// The gauge-variable values of an aligned configuration: [p2y, p3x, ...].
Eigen::VectorXd gauge_coordinates(const Configuration& aligned, int n, int dim = 2);

}  // namespace shapecert
