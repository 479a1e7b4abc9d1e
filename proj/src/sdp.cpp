#include "shapecert/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace shapecert {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// svec layout per block: (r,r), then (r,c) r<c, row-major upper triangle;
// off-diagonal coordinates carry the sqrt(2) isometry factor.
struct Layout {
  std::vector<int> block_offset;  // into x
  std::vector<int> block_dim;
  int free_offset = 0;
  int total = 0;

  static int svec_size(int d) { return d * (d + 1) / 2; }

  int svec_index(int block, int r, int c) const {
    const int d = block_dim[static_cast<std::size_t>(block)];
    // position of (r,c), r<=c, within the row-major upper triangle
    return block_offset[static_cast<std::size_t>(block)] + r * d - r * (r - 1) / 2 + (c - r);
  }
};

Layout make_layout(const SdpFeasibilityProblem& p) {
  Layout lay;
  int off = 0;
  for (const auto& b : p.blocks) {
    lay.block_offset.push_back(off);
    lay.block_dim.push_back(b.dim);
    off += Layout::svec_size(b.dim);
  }
  lay.free_offset = off;
  lay.total = off + p.free_vars;
  return lay;
}

Eigen::MatrixXd unsvec(const Eigen::VectorXd& x, const Layout& lay, int block) {
  const int d = lay.block_dim[static_cast<std::size_t>(block)];
  Eigen::MatrixXd m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      const double v = x[lay.svec_index(block, r, c)];
      if (r == c) {
        m(r, r) = v;
      } else {
        m(r, c) = m(c, r) = v / kSqrt2;
      }
    }
  return m;
}

void svec_into(const Eigen::MatrixXd& m, const Layout& lay, int block, Eigen::VectorXd& x) {
  const int d = lay.block_dim[static_cast<std::size_t>(block)];
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c)
      x[lay.svec_index(block, r, c)] = (r == c) ? m(r, r) : kSqrt2 * m(r, c);
}

// Least-squares projector onto {x : A x = b} through the normal matrix
// G = A A^T. Sparse Cholesky when G is definite, dense complete
// orthogonal decomposition as the rank-deficient fallback.
class AffineProjector {
 public:
  AffineProjector(Eigen::SparseMatrix<double> a, Eigen::VectorXd b,
                  std::vector<std::vector<std::pair<int, double>>> row_terms)
      : a_(std::move(a)), at_(a_.transpose()), b_(std::move(b)), row_terms_(std::move(row_terms)) {
    const Eigen::SparseMatrix<double> g = a_ * at_;
    ldlt_.compute(g);
    if (ldlt_.info() == Eigen::Success) {
      // probe: a singular factorization yields non-finite values
      Eigen::VectorXd probe = ldlt_.solve(Eigen::VectorXd::Ones(g.rows()));
      Eigen::VectorXd back = g * probe;
      if (probe.allFinite() && (back - Eigen::VectorXd::Ones(g.rows())).lpNorm<Eigen::Infinity>() < 1e-8)
        usable_ldlt_ = true;
    }
    if (!usable_ldlt_) {
      cod_ = std::make_unique<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>>(
          Eigen::MatrixXd(g));
    }
  }

  Eigen::VectorXd normal_solve(const Eigen::VectorXd& r) const {
    return usable_ldlt_ ? Eigen::VectorXd(ldlt_.solve(r)) : Eigen::VectorXd(cod_->solve(r));
  }

  // x - A^T G^+ (A x - b)
  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r = a_ * x - b_;
    return x - at_ * normal_solve(r);
  }

  Eigen::VectorXd min_norm_point() const { return at_ * normal_solve(b_); }

  double residual_inf(const Eigen::VectorXd& x) const {
    if (b_.size() == 0) return 0.0;
    return (a_ * x - b_).lpNorm<Eigen::Infinity>();
  }

  int rows() const { return static_cast<int>(b_.size()); }
  const Eigen::VectorXd& rhs() const { return b_; }
  const std::vector<std::pair<int, double>>& row_entries(int row) const {
    return row_terms_[static_cast<std::size_t>(row)];
  }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(a_); }

 private:
  Eigen::SparseMatrix<double> a_;
  Eigen::SparseMatrix<double> at_;
  Eigen::VectorXd b_;
  std::vector<std::vector<std::pair<int, double>>> row_terms_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  std::unique_ptr<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> cod_;
  bool usable_ldlt_ = false;
};

struct ConeProjection {
  Eigen::VectorXd point;
  double min_eig_before = 0.0;  // over all blocks, before clamping
};

// Project onto PSD-cone product; free variables pass through.
ConeProjection project_cone(const Eigen::VectorXd& x, const Layout& lay, Exec exec) {
  ConeProjection out;
  out.point = x;
  const std::ptrdiff_t nblocks = static_cast<std::ptrdiff_t>(lay.block_dim.size());
  std::vector<double> mins(static_cast<std::size_t>(nblocks), 0.0);
  Eigen::VectorXd& target = out.point;
  for_each_index(exec, nblocks, [&](std::ptrdiff_t bi) {
    const int b = static_cast<int>(bi);
    Eigen::MatrixXd m = unsvec(x, lay, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("sdp: eigensolver failed to converge");
    const Eigen::VectorXd& ev = es.eigenvalues();
    mins[static_cast<std::size_t>(bi)] = ev.size() ? ev.minCoeff() : 0.0;
    Eigen::MatrixXd clamped =
        es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    clamped = 0.5 * (clamped + clamped.transpose()).eval();
    svec_into(clamped, lay, b, target);
  });
  out.min_eig_before = 0.0;
  for (double m : mins) out.min_eig_before = std::min(out.min_eig_before, m);
  return out;
}

double min_eig_blocks(const Eigen::VectorXd& x, const Layout& lay, Exec exec) {
  const std::ptrdiff_t nblocks = static_cast<std::ptrdiff_t>(lay.block_dim.size());
  std::vector<double> mins(static_cast<std::size_t>(nblocks), 0.0);
  for_each_index(exec, nblocks, [&](std::ptrdiff_t bi) {
    Eigen::MatrixXd m = unsvec(x, lay, static_cast<int>(bi));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("sdp: eigensolver failed to converge");
    mins[static_cast<std::size_t>(bi)] = m.rows() ? es.eigenvalues().minCoeff() : 0.0;
  });
  double v = 0.0;
  for (double m : mins) v = std::min(v, m);
  return v;
}

SdpSolution make_solution(const Eigen::VectorXd& x, const Layout& lay,
                          const AffineProjector& proj, Exec exec) {
  SdpSolution sol;
  for (std::size_t b = 0; b < lay.block_dim.size(); ++b)
    sol.block_values.push_back(unsvec(x, lay, static_cast<int>(b)));
  sol.free_values = x.tail(lay.total - lay.free_offset);
  sol.residual = proj.residual_inf(x);
  sol.min_eig = min_eig_blocks(x, lay, exec);
  return sol;
}

// Rank-restricted refinement for tangent intersections, where plain
// alternating projections close the gap only sublinearly (e.g. Gram
// spectrahedra that are a single low-rank face). Restrict each block to
// the span of its dominant eigenvectors, solve the small least-squares
// problem, clip to PSD, re-project; the subspace sharpens each round.
std::optional<Eigen::VectorXd> face_polish(const Eigen::VectorXd& start, const Layout& lay,
                                           const AffineProjector& proj,
                                           const SolveOptions& options) {
  const std::size_t nblocks = lay.block_dim.size();
  if (nblocks == 0) return std::nullopt;
  const int nfree = lay.total - lay.free_offset;

  // thresholds derive the rank from the spectrum; explicit small ranks cover
  // unique low-rank solutions whose iterates still carry spurious directions
  struct FaceRule {
    double tau = 0.0;
    int fixed_rank = -1;
  };
  std::vector<FaceRule> rules = {{1e-2, -1}, {1e-4, -1}, {1e-6, -1},
                                 {0.0, 1},   {0.0, 2},   {0.0, 3},   {0.0, 4}};

  for (const FaceRule& rule : rules) {
    Eigen::VectorXd y = start;
    for (int round = 0; round < 16; ++round) {
      // dominant eigenspaces of the current blocks
      std::vector<Eigen::MatrixXd> basis(nblocks);
      int reduced_cols = nfree;
      for (std::size_t b = 0; b < nblocks; ++b) {
        Eigen::MatrixXd m = unsvec(y, lay, static_cast<int>(b));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        if (es.info() != Eigen::Success) return std::nullopt;
        const Eigen::VectorXd& ev = es.eigenvalues();
        int rank;
        if (rule.fixed_rank >= 0) {
          rank = std::min<int>(rule.fixed_rank, static_cast<int>(ev.size()));
        } else {
          const double cut = rule.tau * std::max(1.0, ev.size() ? ev.cwiseAbs().maxCoeff() : 1.0);
          rank = 0;
          for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev[i] > cut) ++rank;
        }
        basis[b] = es.eigenvectors().rightCols(rank);
        reduced_cols += rank * (rank + 1) / 2;
      }
      if (reduced_cols == nfree + lay.free_offset) break;  // no reduction at this threshold
      if (reduced_cols > 2000) break;                      // keep the dense solve small
      if (reduced_cols == 0) {
        // every block clipped away: the only candidate in this face is zero
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(lay.total);
        if (proj.residual_inf(zero) <= options.feas_tol) return zero;
        break;
      }

      // dense reduced system: columns are entries of each S_b then free vars;
      // the svec coordinate (i <= j) of block b evaluates to
      //   (i == j ? 1 : sqrt2) * (V S V^T)_ij
      std::vector<int> roffset(nblocks + 1, 0);
      for (std::size_t b = 0; b < nblocks; ++b) {
        const int r = static_cast<int>(basis[b].cols());
        roffset[b + 1] = roffset[b] + r * (r + 1) / 2;
      }
      const int rtotal = roffset[nblocks] + nfree;
      Eigen::MatrixXd ar = Eigen::MatrixXd::Zero(proj.rows(), rtotal);
      for (int row = 0; row < proj.rows(); ++row) {
        for (const auto& [col, w] : proj.row_entries(row)) {
          if (col >= lay.free_offset) {
            ar(row, roffset[nblocks] + (col - lay.free_offset)) += w;
            continue;
          }
          // locate (block, i, j) of this svec coordinate
          std::size_t b = 0;
          while (b + 1 < nblocks && lay.block_offset[b + 1] <= col) ++b;
          const int d = lay.block_dim[b];
          int rem = col - lay.block_offset[b];
          int i = 0;
          while (rem >= d - i) {
            rem -= d - i;
            ++i;
          }
          const int j = i + rem;
          const Eigen::MatrixXd& v = basis[b];
          const int r = static_cast<int>(v.cols());
          const double svec_scale = (i == j) ? 1.0 : kSqrt2;
          int sc = 0;
          for (int aa = 0; aa < r; ++aa)
            for (int cc = aa; cc < r; ++cc, ++sc) {
              double m = v(i, aa) * v(j, cc);
              if (aa != cc) m += v(i, cc) * v(j, aa);
              ar(row, roffset[b] + sc) += w * svec_scale * m;
            }
        }
      }
      Eigen::VectorXd s =
          Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(ar).solve(proj.rhs());
      if (!s.allFinite()) break;

      // reconstruct, clip each S_b to PSD
      Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.total);
      for (std::size_t b = 0; b < nblocks; ++b) {
        const int r = static_cast<int>(basis[b].cols());
        Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(r, r);
        int sc = 0;
        for (int aa = 0; aa < r; ++aa)
          for (int cc = aa; cc < r; ++cc, ++sc) {
            sb(aa, cc) = s[roffset[b] + sc];
            sb(cc, aa) = sb(aa, cc);
          }
        Eigen::MatrixXd full = basis[b] * project_psd(sb) * basis[b].transpose();
        svec_into(0.5 * (full + full.transpose()), lay, static_cast<int>(b), x);
      }
      x.tail(nfree) = s.tail(nfree);

      if (proj.residual_inf(x) <= options.feas_tol) return x;  // PSD by construction
      Eigen::VectorXd yn = proj.project(x);
      if (proj.residual_inf(yn) <= options.feas_tol &&
          min_eig_blocks(yn, lay, options.exec) >= -options.psd_tol)
        return yn;
      y = yn;
    }
  }
  return std::nullopt;
}

// Cone-relaxation continuation for tangent intersections (e.g. a Gram
// spectrahedron that is a single rank-deficient point). The relaxed cone
// {X : X + eps I >= 0} gives the intersection an eps-wide relative
// interior, so the splitting converges quickly; the solution of each rung
// warm-starts the next as eps steps down to the PSD tolerance.
std::optional<Eigen::VectorXd> shift_homotopy(const Eigen::VectorXd& start, const Layout& lay,
                                              const AffineProjector& proj,
                                              const SolveOptions& options) {
  const std::size_t nblocks = lay.block_dim.size();
  if (nblocks == 0) return std::nullopt;
  if (lay.total > 3000) return std::nullopt;  // endgame pass for small problems only

  auto project_relaxed = [&](const Eigen::VectorXd& v, double eps) {
    Eigen::VectorXd out = v;
    for_each_index(options.exec, static_cast<std::ptrdiff_t>(nblocks), [&](std::ptrdiff_t bi) {
      Eigen::MatrixXd m = unsvec(v, lay, static_cast<int>(bi));
      m.diagonal().array() += eps;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      if (es.info() != Eigen::Success) throw std::runtime_error("sdp: eigensolver failed to converge");
      Eigen::MatrixXd clamped = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                es.eigenvectors().transpose();
      clamped = (0.5 * (clamped + clamped.transpose())).eval();
      clamped.diagonal().array() -= eps;
      svec_into(clamped, lay, static_cast<int>(bi), out);
    });
    return out;
  };

  const double eps_floor = std::max(0.5 * options.psd_tol, 1e-9);
  std::vector<double> ladder;
  for (double e = 1e-2; e > eps_floor * 1.0001; e *= 0.1) ladder.push_back(e);
  ladder.push_back(eps_floor);

  Eigen::VectorXd z = start;
  const int rung_iters = std::max(500, options.max_iters / 20);
  for (double eps : ladder) {
    for (int it = 1; it <= rung_iters; ++it) {
      Eigen::VectorXd cone = project_relaxed(z, eps);
      Eigen::VectorXd y = proj.project(2.0 * cone - z);
      z += y - cone;
      if (it % options.check_every == 0) {
        if (eps <= options.psd_tol && proj.residual_inf(cone) <= options.feas_tol) return cone;
        if (min_eig_blocks(y, lay, options.exec) >= -options.psd_tol &&
            proj.residual_inf(y) <= options.feas_tol)
          return y;
        if ((y - cone).norm() <= std::max(0.01 * eps, options.feas_tol)) break;  // next rung
      }
    }
  }
  Eigen::VectorXd y = proj.project(project_relaxed(z, eps_floor));
  if (min_eig_blocks(y, lay, options.exec) >= -options.psd_tol &&
      proj.residual_inf(y) <= options.feas_tol)
    return y;
  return std::nullopt;
}

// Exact endgame for solutions that are (near) rank one per block, e.g. the
// Gram matrix of a perfect square: round the dominant eigenfactor of each
// block to small rationals and accept only if every constraint holds
// exactly in rational arithmetic. Zero false positives by construction.
std::optional<Eigen::VectorXd> rank1_snap(const Eigen::VectorXd& seed, const Layout& lay,
                                          const SdpFeasibilityProblem& problem) {
  const std::size_t nblocks = lay.block_dim.size();
  if (nblocks == 0) return std::nullopt;
  const int nfree = lay.total - lay.free_offset;

  struct Factor {
    Eigen::VectorXd l;  // dominant factor, sign-normalized
  };
  std::vector<Factor> factors(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    Eigen::MatrixXd m = unsvec(seed, lay, static_cast<int>(b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) return std::nullopt;
    const Eigen::Index top = es.eigenvalues().size() - 1;
    const double l1 = es.eigenvalues()[top];
    if (l1 <= 0.0) {
      factors[b].l = Eigen::VectorXd::Zero(m.rows());
      continue;
    }
    Eigen::VectorXd v = std::sqrt(l1) * es.eigenvectors().col(top);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    factors[b].l = v;
  }

  for (std::uint64_t cap : {std::uint64_t(1), std::uint64_t(4), std::uint64_t(16),
                            std::uint64_t(64), std::uint64_t(1024)}) {
    std::vector<std::vector<Rational>> lhat(nblocks);
    bool ok = true;
    for (std::size_t b = 0; b < nblocks && ok; ++b) {
      lhat[b].resize(static_cast<std::size_t>(factors[b].l.size()));
      for (Eigen::Index i = 0; i < factors[b].l.size(); ++i) {
        auto r = round_to_rational(factors[b].l[i], cap);
        if (!r) {
          ok = false;
          break;
        }
        lhat[b][static_cast<std::size_t>(i)] = *r;
      }
    }
    if (!ok) continue;
    std::vector<Rational> free_vals(static_cast<std::size_t>(nfree));
    for (int i = 0; i < nfree; ++i) {
      auto r = round_to_rational(seed[lay.free_offset + i], 1000000);
      if (!r) {
        ok = false;
        break;
      }
      free_vals[static_cast<std::size_t>(i)] = *r;
    }
    if (!ok) continue;

    bool exact = true;
    for (const auto& con : problem.constraints) {
      Rational acc = 0;
      for (const auto& [ref, w] : con.matrix_terms) {
        const auto& l = lhat[static_cast<std::size_t>(ref.block)];
        acc += w * l[static_cast<std::size_t>(ref.row)] * l[static_cast<std::size_t>(ref.col)];
      }
      for (const auto& [idx, w] : con.free_terms)
        acc += w * free_vals[static_cast<std::size_t>(idx)];
      if (acc != con.rhs) {
        exact = false;
        break;
      }
    }
    if (!exact) continue;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.total);
    for (std::size_t b = 0; b < nblocks; ++b) {
      const Eigen::Index d = factors[b].l.size();
      Eigen::MatrixXd q(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          q(i, j) = to_double(lhat[b][static_cast<std::size_t>(i)] *
                              lhat[b][static_cast<std::size_t>(j)]);
      svec_into(q, lay, static_cast<int>(b), x);
    }
    for (int i = 0; i < nfree; ++i)
      x[lay.free_offset + i] = to_double(free_vals[static_cast<std::size_t>(i)]);
    return x;
  }
  return std::nullopt;
}

// In-slice log-det centering for small problems. Parametrize the affine
// subspace as x0 + K u (K a kernel basis of A), keep the blocks of x0 + K u
// shifted-positive-definite, and drive the shift down by Newton steps on
// sum_b logdet(X_b + sigma I). Stays exactly affine-feasible throughout, so
// success means min_eig >= -psd_tol at residual ~ 0.
std::optional<Eigen::VectorXd> center_polish(const Eigen::VectorXd& start, const Layout& lay,
                                             const Eigen::MatrixXd& a_dense,
                                             const AffineProjector& proj,
                                             const SolveOptions& options) {
  const std::size_t nblocks = lay.block_dim.size();
  if (nblocks == 0) return std::nullopt;
  if (lay.total > 3000) return std::nullopt;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a_dense);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd kernel = lu.kernel();  // total x k
  const Eigen::Index k = kernel.cols();
  if (k == 0 || k > 600) return std::nullopt;

  Eigen::VectorXd x = proj.project(start);
  double min_eig = min_eig_blocks(x, lay, options.exec);
  if (min_eig >= -options.psd_tol) return x;
  double sigma = 2.0 * std::abs(min_eig) + 1e-6;

  auto blocks_of = [&](const Eigen::VectorXd& v) {
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t b = 0; b < nblocks; ++b) out.push_back(unsvec(v, lay, static_cast<int>(b)));
    return out;
  };
  // PD probe of all blocks at shift sigma
  auto pd_ok = [&](const Eigen::VectorXd& v, double shift) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      Eigen::MatrixXd m = unsvec(v, lay, static_cast<int>(b));
      m.diagonal().array() += shift;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) return false;
    }
    return true;
  };

  int newton_budget = 150;
  while (newton_budget > 0 && sigma > 0.5 * options.psd_tol) {
    // a few Newton steps of u -> sum_b logdet(X_b(u) + sigma I) from u = 0
    for (int step = 0; step < 4 && newton_budget > 0; ++step, --newton_budget) {
      std::vector<Eigen::MatrixXd> xb = blocks_of(x);
      std::vector<Eigen::MatrixXd> inv(nblocks);
      for (std::size_t b = 0; b < nblocks; ++b) {
        Eigen::MatrixXd m = xb[b];
        m.diagonal().array() += sigma;
        inv[b] = m.llt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
      }
      // gradient and Hessian over the kernel coordinates
      Eigen::VectorXd grad(k);
      Eigen::MatrixXd hess(k, k);
      std::vector<std::vector<Eigen::MatrixXd>> dirs(
          static_cast<std::size_t>(k));  // per direction, per block: inv * B
      for (Eigen::Index i = 0; i < k; ++i) {
        dirs[static_cast<std::size_t>(i)].resize(nblocks);
        double g = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
          Eigen::MatrixXd bi = unsvec(kernel.col(i), lay, static_cast<int>(b));
          Eigen::MatrixXd ib = inv[b] * bi;
          g += ib.trace();
          dirs[static_cast<std::size_t>(i)][b] = std::move(ib);
        }
        grad[i] = g;
      }
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j) {
          double hij = 0.0;
          for (std::size_t b = 0; b < nblocks; ++b)
            hij += (dirs[static_cast<std::size_t>(i)][b] * dirs[static_cast<std::size_t>(j)][b])
                       .trace();
          hess(i, j) = hess(j, i) = hij;
        }
      hess.diagonal().array() += 1e-12 * (1.0 + hess.trace());
      Eigen::VectorXd du = hess.ldlt().solve(grad);
      if (!du.allFinite()) return std::nullopt;
      // backtracking line search keeping all blocks PD at shift sigma
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        Eigen::VectorXd cand = x + t * (kernel * du);
        if (pd_ok(cand, sigma)) {
          x = cand;
          moved = true;
          break;
        }
      }
      if (!moved) break;
      if (sigma < 1e-5 && min_eig_blocks(x, lay, options.exec) >= -options.psd_tol &&
          proj.residual_inf(x) <= options.feas_tol)
        return x;
      if (grad.dot(du) < 1e-10) break;  // centered enough at this shift
    }
    min_eig = min_eig_blocks(x, lay, options.exec);
    if (min_eig >= -options.psd_tol && proj.residual_inf(x) <= options.feas_tol) return x;
    // the center at shift sigma sits around min_eig ~ -sigma/2, so the
    // ladder must shrink gently; bisect back toward sigma when the centered
    // point cannot support the next shift yet
    double next = std::max(0.4 * options.psd_tol, sigma / 1.8);
    int tries = 0;
    while (!pd_ok(x, next) && tries++ < 4) next = 0.5 * (sigma + next);
    if (!pd_ok(x, next)) return std::nullopt;
    sigma = next;
  }
  min_eig = min_eig_blocks(x, lay, options.exec);
  if (min_eig >= -options.psd_tol && proj.residual_inf(x) <= options.feas_tol) return x;
  return std::nullopt;
}

}  // namespace

void SdpFeasibilityProblem::validate() const {
  for (const auto& b : blocks)
    if (b.dim <= 0) throw std::invalid_argument("sdp: block dimension must be positive");
  if (free_vars < 0) throw std::invalid_argument("sdp: negative free variable count");
  for (const auto& c : constraints) {
    for (const auto& [ref, coeff] : c.matrix_terms) {
      (void)coeff;
      if (ref.block < 0 || static_cast<std::size_t>(ref.block) >= blocks.size())
        throw std::invalid_argument("sdp: block reference out of range");
      const int d = blocks[static_cast<std::size_t>(ref.block)].dim;
      if (ref.row < 0 || ref.col < 0 || ref.row >= d || ref.col >= d)
        throw std::invalid_argument("sdp: matrix entry out of range");
      if (ref.row > ref.col)
        throw std::invalid_argument("sdp: lower-triangle entry referenced (use row <= col)");
    }
    for (const auto& [idx, coeff] : c.free_terms) {
      (void)coeff;
      if (idx < 0 || idx >= free_vars)
        throw std::invalid_argument("sdp: free variable index out of range");
    }
  }
  // guard against accidental astronomical sizes
  std::int64_t total = free_vars;
  for (const auto& b : blocks) total += static_cast<std::int64_t>(b.dim) * (b.dim + 1) / 2;
  if (total > (std::int64_t(1) << 26))
    throw std::invalid_argument("sdp: variable count exceeds dimension guard");
}

SolveStatus solve(const SdpFeasibilityProblem& problem, const SolveOptions& options) {
  problem.validate();
  const Layout lay = make_layout(problem);

  // assemble A, b in svec coordinates
  const int m = static_cast<int>(problem.constraints.size());
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<std::vector<std::pair<int, double>>> row_terms(static_cast<std::size_t>(m));
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const auto& c = problem.constraints[static_cast<std::size_t>(i)];
    for (const auto& [ref, coeff] : c.matrix_terms) {
      const double w = to_double(coeff);
      const double scaled = (ref.row == ref.col) ? w : w / kSqrt2;
      const int col = lay.svec_index(ref.block, ref.row, ref.col);
      trips.emplace_back(i, col, scaled);
      row_terms[static_cast<std::size_t>(i)].emplace_back(col, scaled);
    }
    for (const auto& [idx, coeff] : c.free_terms) {
      trips.emplace_back(i, lay.free_offset + idx, to_double(coeff));
      row_terms[static_cast<std::size_t>(i)].emplace_back(lay.free_offset + idx, to_double(coeff));
    }
    b[i] = to_double(c.rhs);
  }
  Eigen::SparseMatrix<double> a(m, lay.total);
  a.setFromTriplets(trips.begin(), trips.end());

  SolveStatus status;
  if (lay.total == 0) {
    status.outcome = m == 0 ? SolveOutcome::Feasible : SolveOutcome::Unknown;
    status.diagnostic = m == 0 ? "" : "no variables but constraints present";
    return status;
  }

  AffineProjector proj(std::move(a), std::move(b), std::move(row_terms));

  // consistency of the affine system itself
  Eigen::VectorXd x = proj.min_norm_point();
  const double ls_residual = proj.residual_inf(x);
  if (!x.allFinite() || ls_residual > std::max(options.feas_tol, 1e-7)) {
    std::ostringstream os;
    os << "affine constraint system inconsistent (least-squares residual " << ls_residual << ")";
    status.outcome = SolveOutcome::Unknown;
    status.diagnostic = os.str();
    status.solution = make_solution(x.allFinite() ? x : Eigen::VectorXd::Zero(lay.total), lay,
                                    proj, options.exec);
    return status;
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(lay.total);  // Dykstra correction (cone side)
  Eigen::VectorXd z = x;                                 // Douglas-Rachford driver state
  double checkpoint_gap = std::numeric_limits<double>::infinity();
  const double tol_floor = 10.0 * std::max(options.feas_tol, options.psd_tol);
  const bool use_dr = options.algorithm == SdpAlgorithm::DouglasRachford;

  // refinement ladders: the cheap rank-restricted pass runs at progress
  // checkpoints; the centering and continuation passes only when the main
  // loop is out of options
  auto light_polish = [&](const Eigen::VectorXd& seed) -> std::optional<Eigen::VectorXd> {
    if (auto refined = face_polish(seed, lay, proj, options)) return refined;
    return rank1_snap(seed, lay, problem);
  };
  auto full_polish = [&](const Eigen::VectorXd& seed) -> std::optional<Eigen::VectorXd> {
    if (auto refined = face_polish(seed, lay, proj, options)) return refined;
    if (auto snapped = rank1_snap(seed, lay, problem)) return snapped;
    if (lay.total <= 3000)
      if (auto centered = center_polish(seed, lay, proj.dense(), proj, options)) return centered;
    if (auto pushed = shift_homotopy(seed, lay, proj, options)) return pushed;
    return std::nullopt;
  };

  for (int it = 1; it <= options.max_iters; ++it) {
    Eigen::VectorXd y;
    Eigen::VectorXd cone_point;
    if (use_dr) {
      ConeProjection cone = project_cone(z, lay, options.exec);
      cone_point = std::move(cone.point);
      y = proj.project(2.0 * cone_point - z);
      z += y - cone_point;
    } else {
      ConeProjection cone = project_cone(x + q, lay, options.exec);
      cone_point = std::move(cone.point);
      q = x + q - cone_point;
      y = proj.project(cone_point);
      x = y;
    }
    const double gap = (y - cone_point).norm();
    const double cone_residual = proj.residual_inf(cone_point);
    if (cone_residual <= options.feas_tol) {
      status.outcome = SolveOutcome::Feasible;
      status.iterations = it;
      status.solution = make_solution(cone_point, lay, proj, options.exec);
      return status;
    }

    if (it % options.check_every == 0 || gap <= options.feas_tol) {
      const double y_residual = proj.residual_inf(y);
      if (y_residual <= options.feas_tol &&
          min_eig_blocks(y, lay, options.exec) >= -options.psd_tol) {
        status.outcome = SolveOutcome::Feasible;
        status.iterations = it;
        status.solution = make_solution(y, lay, proj, options.exec);
        return status;
      }
    }

    if (it % options.stall_window == 0) {
      const bool progressing = gap < checkpoint_gap * (1.0 - options.stall_rel);
      if (!progressing || gap < 1e-3) {
        if (auto refined = light_polish(y)) {
          status.outcome = SolveOutcome::Feasible;
          status.iterations = it;
          status.solution = make_solution(*refined, lay, proj, options.exec);
          return status;
        }
      }
      if (!progressing && gap > tol_floor) {
        if (auto refined = full_polish(y)) {
          status.outcome = SolveOutcome::Feasible;
          status.iterations = it;
          status.solution = make_solution(*refined, lay, proj, options.exec);
          return status;
        }
        std::ostringstream os;
        os << "stalled (projection gap " << gap << " after " << it << " iterations)";
        status.outcome = SolveOutcome::Unknown;
        status.diagnostic = os.str();
        status.iterations = it;
        status.solution = make_solution(y, lay, proj, options.exec);
        return status;
      }
      checkpoint_gap = gap;
    }
  }

  Eigen::VectorXd last = use_dr ? proj.project(project_cone(z, lay, options.exec).point) : x;
  if (auto refined = full_polish(last)) {
    status.outcome = SolveOutcome::Feasible;
    status.iterations = options.max_iters;
    status.solution = make_solution(*refined, lay, proj, options.exec);
    return status;
  }
  status.outcome = SolveOutcome::Unknown;
  status.diagnostic = "max_iters exhausted";
  status.iterations = options.max_iters;
  status.solution = make_solution(last, lay, proj, options.exec);
  return status;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("project_psd: eigensolver failed to converge");
  Eigen::MatrixXd out = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                        es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue: eigensolver failed to converge");
  return es.eigenvalues().minCoeff();
}

bool rational_psd(std::vector<std::vector<Rational>> m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw std::invalid_argument("rational_psd: matrix not square");
  for (std::size_t k = 0; k < n; ++k) {
    if (m[k][k] < 0) return false;
    if (m[k][k] == 0) {
      for (std::size_t j = k + 1; j < n; ++j)
        if (m[k][j] != 0) return false;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m[i][k] == 0) continue;
      const Rational f = m[i][k] / m[k][k];
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return true;
}

}  // namespace shapecert
