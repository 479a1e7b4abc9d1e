#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "shapecert/parallel.hpp"
#include "shapecert/rational.hpp"

namespace shapecert {

/// Reference to an upper-triangle entry (row <= col) of a symmetric
/// matrix variable.
struct MatrixEntryRef {
  int block = 0;
  int row = 0;
  int col = 0;
};

/// sum(coeff * X[block](row,col)) + sum(coeff * y[free]) == rhs
struct AffineConstraint {
  std::vector<std::pair<MatrixEntryRef, Rational>> matrix_terms;
  std::vector<std::pair<int, Rational>> free_terms;
  Rational rhs = 0;
};

struct BlockSpec {
  std::string name;
  int dim = 0;
};

/// Feasibility problem: find PSD matrices (one per block) and free
/// scalars satisfying the affine equality constraints.
struct SdpFeasibilityProblem {
  std::vector<BlockSpec> blocks;
  int free_vars = 0;
  std::vector<AffineConstraint> constraints;

  /// Throws std::invalid_argument on out-of-range references or
  /// lower-triangle entries.
  void validate() const;
};

struct SdpSolution {
  std::vector<Eigen::MatrixXd> block_values;
  Eigen::VectorXd free_values;
  double residual = 0.0;  // max absolute constraint violation
  double min_eig = 0.0;   // smallest eigenvalue over all blocks
};

enum class SolveOutcome { Feasible, Unknown };

/// Feasible carries a point satisfying the tolerances; Unknown carries the
/// last iterate and a diagnostic. This solver never certifies infeasibility.
struct SolveStatus {
  SolveOutcome outcome = SolveOutcome::Unknown;
  SdpSolution solution;
  std::string diagnostic;
  int iterations = 0;

  bool feasible() const { return outcome == SolveOutcome::Feasible; }
};

enum class SdpAlgorithm {
  DouglasRachford,         // default: same two projections, robust to bad angles
  AlternatingProjections,  // Dykstra-corrected alternating projections
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double psd_tol = 1e-8;
  int max_iters = 50000;
  int check_every = 8;      // cadence of the full feasibility test
  int stall_window = 1500;  // iterations per progress checkpoint
  double stall_rel = 1e-6;  // minimum relative gap decrease per window
  SdpAlgorithm algorithm = SdpAlgorithm::DouglasRachford;
  Exec exec = Exec::Serial;
};

/// Projection splitting between the affine subspace (least-squares via a
/// precomputed factorization) and the PSD cone product. Slow-angle and
/// low-rank-face instances get a rank-restricted refinement and, for small
/// problems, an in-slice log-det centering polish before giving up.
/// Deterministic given identical inputs; never certifies infeasibility.
SolveStatus solve(const SdpFeasibilityProblem& problem, const SolveOptions& options = {});

/// Nearest PSD matrix in Frobenius norm (eigendecomposition, negative
/// eigenvalues clamped to zero). Input is symmetrized first.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Exact positive-semidefiniteness test of a symmetric rational matrix
/// via fraction-free LDL^T pivots.
bool rational_psd(std::vector<std::vector<Rational>> m);

}  // namespace shapecert
