#include "shapecert/formation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shapecert {

FormationSpec FormationSpec::complete(int n, std::vector<Rational> dbar_sq, int dim) {
  FormationSpec spec;
  spec.n = n;
  spec.dim = dim;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) spec.edges.emplace_back(i, j);
  spec.dbar_sq = std::move(dbar_sq);
  spec.validate();
  return spec;
}

void FormationSpec::validate() const {
  if (n < 2) throw std::invalid_argument("formation: need at least two agents");
  if (dim < 1) throw std::invalid_argument("formation: dimension must be positive");
  if (edges.empty()) throw std::invalid_argument("formation: no edges");
  if (dbar_sq.size() != edges.size())
    throw std::invalid_argument("formation: one squared distance per edge required");
  std::vector<std::pair<int, int>> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    auto [i, j] = sorted[k];
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("formation: edge endpoint out of range");
    if (i == j) throw std::invalid_argument("formation: self-loop edge");
    if (k && sorted[k] == sorted[k - 1])
      throw std::invalid_argument("formation: duplicate edge");
  }
  for (const auto& [i, j] : edges)
    if (i >= j) throw std::invalid_argument("formation: edges must be stored as (i, j) with i < j");
  for (const auto& d : dbar_sq)
    if (d <= 0) throw std::invalid_argument("formation: squared distances must be positive");
}

namespace {

void check_config(const Configuration& p, const FormationSpec& spec) {
  if (p.size() != spec.coords())
    throw std::invalid_argument("configuration length does not match n*dim");
}

}  // namespace

Eigen::VectorXd error_vector(const Configuration& p, const FormationSpec& spec) {
  check_config(p, spec);
  const int d = spec.dim;
  Eigen::VectorXd e(spec.edge_count());
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = p[i * d + c] - p[j * d + c];
      s += diff * diff;
    }
    e[k] = s - to_double(spec.dbar_sq[static_cast<std::size_t>(k)]);
  }
  return e;
}

double potential(const Configuration& p, const FormationSpec& spec) {
  return 0.25 * error_vector(p, spec).squaredNorm();
}

Eigen::VectorXd flow_rhs(const Configuration& p, const FormationSpec& spec) {
  check_config(p, spec);
  const int d = spec.dim;
  const Eigen::VectorXd e = error_vector(p, spec);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.coords());
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    for (int c = 0; c < d; ++c) {
      const double diff = p[j * d + c] - p[i * d + c];
      v[i * d + c] += e[k] * diff;
      v[j * d + c] -= e[k] * diff;
    }
  }
  return v;
}

Eigen::VectorXd flow_rhs_rigidity(const Configuration& p, const FormationSpec& spec) {
  return -rigidity_matrix(p, spec).transpose() * error_vector(p, spec);
}

Eigen::VectorXd flow_rhs_weight_matrix(const Configuration& p, const FormationSpec& spec) {
  const Eigen::MatrixXd em = e_matrix(p, spec);
  const int d = spec.dim;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.coords());
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      if (em(i, j) == 0.0) continue;
      for (int c = 0; c < d; ++c) v[i * d + c] -= em(i, j) * p[j * d + c];
    }
  return v;
}

Eigen::MatrixXd e_matrix(const Configuration& p, const FormationSpec& spec) {
  check_config(p, spec);
  const Eigen::VectorXd e = error_vector(p, spec);
  Eigen::MatrixXd em = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    em(i, j) -= e[k];
    em(j, i) -= e[k];
    em(i, i) += e[k];
    em(j, j) += e[k];
  }
  return em;
}

Eigen::MatrixXd rigidity_matrix(const Configuration& p, const FormationSpec& spec) {
  check_config(p, spec);
  const int d = spec.dim;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(spec.edge_count(), spec.coords());
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    for (int c = 0; c < d; ++c) {
      const double diff = p[i * d + c] - p[j * d + c];
      r(k, i * d + c) = diff;
      r(k, j * d + c) = -diff;
    }
  }
  return r;
}

Eigen::MatrixXd hessian(const Configuration& p, const FormationSpec& spec) {
  const Eigen::MatrixXd r = rigidity_matrix(p, spec);
  const Eigen::MatrixXd em = e_matrix(p, spec);
  Eigen::MatrixXd h = 2.0 * r.transpose() * r;
  const int d = spec.dim;
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      if (em(i, j) == 0.0) continue;
      for (int c = 0; c < d; ++c) h(i * d + c, j * d + c) += em(i, j);
    }
  return h;
}

// --- simulation ---------------------------------------------------------

SimulationResult simulate(const Configuration& p0, const FormationSpec& spec,
                          const SimulateOptions& opts) {
  check_config(p0, spec);
  if (opts.step <= 0) throw std::invalid_argument("simulate: step must be positive");
  SimulationResult res;
  const int d = spec.dim;

  Configuration p = p0;
  double t = 0.0;
  double phi_prev = potential(p, spec);

  Eigen::VectorXd centroid0 = Eigen::VectorXd::Zero(d);
  auto centroid = [&](const Configuration& q) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < spec.n; ++i)
      for (int cc = 0; cc < d; ++cc) c[cc] += q[i * d + cc];
    return Eigen::VectorXd(c / spec.n);
  };
  centroid0 = centroid(p);

  auto record = [&](double time, const Configuration& q) {
    TrajectorySample s;
    s.t = time;
    s.p = q;
    s.err_norm = error_vector(q, spec).norm();
    s.phi = potential(q, spec);
    res.trajectory.push_back(std::move(s));
  };
  record(0.0, p);

  const long max_steps = static_cast<long>(std::ceil(opts.max_time / opts.step));
  const int record_every = std::max(1, opts.record_every);

  while (true) {
    const Eigen::VectorXd k1 = flow_rhs(p, spec);
    res.terminal_rhs_norm = k1.norm();
    if (res.terminal_rhs_norm <= opts.eq_tol) {
      res.converged = true;
      break;
    }
    if (!p.allFinite() || p.lpNorm<Eigen::Infinity>() > opts.divergence_bound) {
      res.diverged = true;
      break;
    }
    if (res.steps >= max_steps) break;

    const double h = opts.step;
    const Eigen::VectorXd k2 = flow_rhs(p + 0.5 * h * k1, spec);
    const Eigen::VectorXd k3 = flow_rhs(p + 0.5 * h * k2, spec);
    const Eigen::VectorXd k4 = flow_rhs(p + h * k3, spec);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    ++res.steps;

    const double phi = potential(p, spec);
    res.max_phi_increase = std::max(res.max_phi_increase, phi - phi_prev);
    phi_prev = phi;
    res.centroid_drift = std::max(
        res.centroid_drift, (centroid(p) - centroid0).lpNorm<Eigen::Infinity>());

    if (res.steps % record_every == 0) record(t, p);
  }

  if (res.trajectory.empty() || res.trajectory.back().t != t) record(t, p);
  res.terminal = p;
  if (res.converged) {
    ClassifyTolerances tols;
    tols.eq_tol = opts.eq_tol;
    res.report = classify_equilibrium(p, spec, tols);
  }
  return res;
}

std::vector<SimulationResult> simulate_batch(const std::vector<Configuration>& inits,
                                             const FormationSpec& spec,
                                             const SimulateOptions& opts, Exec exec) {
  std::vector<SimulationResult> out(inits.size());
  for_each_index(exec, static_cast<std::ptrdiff_t>(inits.size()), [&](std::ptrdiff_t i) {
    out[static_cast<std::size_t>(i)] = simulate(inits[static_cast<std::size_t>(i)], spec, opts);
  });
  return out;
}

EquilibriumReport classify_equilibrium(const Configuration& p, const FormationSpec& spec,
                                       const ClassifyTolerances& tols) {
  check_config(p, spec);
  EquilibriumReport rep;
  rep.p = p;
  rep.rhs_norm = flow_rhs(p, spec).norm();
  if (rep.rhs_norm > tols.eq_tol) {
    std::ostringstream os;
    os << "classify_equilibrium called at a non-equilibrium (|rhs| = " << rep.rhs_norm << ")";
    throw std::invalid_argument(os.str());
  }
  rep.error_norm = error_vector(p, spec).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(p, spec), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("classify_equilibrium: eigensolver failed");
  rep.hessian_eigs.assign(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  if (rep.error_norm <= tols.err_tol) {
    rep.classification = "correct";
    return rep;
  }
  const double min_eig = rep.hessian_eigs.front();
  if (min_eig <= -tols.zero_tol) {
    rep.classification = "incorrect-unstable";
    return rep;
  }
  int near_zero = 0;
  for (double ev : rep.hessian_eigs)
    if (std::abs(ev) < tols.zero_tol) ++near_zero;
  rep.classification = near_zero == 3 ? "incorrect-stable-candidate" : "degenerate";
  return rep;
}

// --- symbolic constructions ----------------------------------------------

namespace {

std::size_t ring_size(const FormationSpec& spec, bool parametric) {
  return static_cast<std::size_t>(spec.coords()) +
         (parametric ? spec.edges.size() : std::size_t{0});
}

Polynomial coordinate(const FormationSpec& spec, bool parametric, int agent, int c) {
  return Polynomial::variable(ring_size(spec, parametric),
                              static_cast<std::size_t>(agent * spec.dim + c));
}

}  // namespace

std::vector<Polynomial> error_polynomials(const FormationSpec& spec, bool parametric) {
  spec.validate();
  const std::size_t nv = ring_size(spec, parametric);
  std::vector<Polynomial> out;
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    Polynomial e(nv);
    for (int c = 0; c < spec.dim; ++c) {
      Polynomial diff = coordinate(spec, parametric, i, c) - coordinate(spec, parametric, j, c);
      e += diff * diff;
    }
    if (parametric) {
      e -= Polynomial::variable(nv, static_cast<std::size_t>(spec.coords() + k));
    } else {
      e -= Polynomial::constant(nv, spec.dbar_sq[static_cast<std::size_t>(k)]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

Polynomial error_norm_sq_polynomial(const FormationSpec& spec, bool parametric) {
  Polynomial acc(ring_size(spec, parametric));
  for (const auto& e : error_polynomials(spec, parametric)) acc += e * e;
  return acc;
}

Polynomial potential_polynomial(const FormationSpec& spec, bool parametric) {
  return error_norm_sq_polynomial(spec, parametric).scaled(Rational(1, 4));
}

namespace {

SquareMatrix<Polynomial> e_matrix_polynomial(const FormationSpec& spec, bool parametric) {
  const std::size_t nv = ring_size(spec, parametric);
  SquareMatrix<Polynomial> em(static_cast<std::size_t>(spec.n), Polynomial::zero(nv));
  const std::vector<Polynomial> errs = error_polynomials(spec, parametric);
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    const Polynomial& e = errs[static_cast<std::size_t>(k)];
    em.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -= e;
    em.at(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) -= e;
    em.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) += e;
    em.at(static_cast<std::size_t>(j), static_cast<std::size_t>(j)) += e;
  }
  return em;
}

}  // namespace

std::vector<Polynomial> equilibrium_rows(const FormationSpec& spec, bool parametric) {
  spec.validate();
  const std::size_t nv = ring_size(spec, parametric);
  const SquareMatrix<Polynomial> em = e_matrix_polynomial(spec, parametric);
  std::vector<Polynomial> rows;
  for (int i = 0; i < spec.n; ++i)
    for (int c = 0; c < spec.dim; ++c) {
      Polynomial row(nv);
      for (int j = 0; j < spec.n; ++j) {
        const Polynomial& eij = em.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (!eij.is_zero()) row += eij * coordinate(spec, parametric, j, c);
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

SquareMatrix<Polynomial> hessian_polynomial(const FormationSpec& spec, bool parametric) {
  spec.validate();
  const std::size_t nv = ring_size(spec, parametric);
  const std::size_t nc = static_cast<std::size_t>(spec.coords());
  // rigidity rows: edge k, entries linear in positions
  std::vector<std::vector<Polynomial>> r(
      static_cast<std::size_t>(spec.edge_count()), std::vector<Polynomial>(nc, Polynomial::zero(nv)));
  for (int k = 0; k < spec.edge_count(); ++k) {
    const auto& [i, j] = spec.edges[static_cast<std::size_t>(k)];
    for (int c = 0; c < spec.dim; ++c) {
      Polynomial diff = coordinate(spec, parametric, i, c) - coordinate(spec, parametric, j, c);
      r[static_cast<std::size_t>(k)][static_cast<std::size_t>(i * spec.dim + c)] = diff;
      r[static_cast<std::size_t>(k)][static_cast<std::size_t>(j * spec.dim + c)] = -diff;
    }
  }
  SquareMatrix<Polynomial> h(nc, Polynomial::zero(nv));
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = a; b < nc; ++b) {
      Polynomial acc(nv);
      for (int k = 0; k < spec.edge_count(); ++k) {
        const Polynomial& ra = r[static_cast<std::size_t>(k)][a];
        const Polynomial& rb = r[static_cast<std::size_t>(k)][b];
        if (!ra.is_zero() && !rb.is_zero()) acc += ra * rb;
      }
      acc = acc.scaled(2);  // 2 R^T R
      h.at(a, b) = acc;
      if (a != b) h.at(b, a) = acc;
    }
  const SquareMatrix<Polynomial> em = e_matrix_polynomial(spec, parametric);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      const Polynomial& eij = em.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (eij.is_zero()) continue;
      for (int c = 0; c < spec.dim; ++c) {
        const std::size_t a = static_cast<std::size_t>(i * spec.dim + c);
        const std::size_t b = static_cast<std::size_t>(j * spec.dim + c);
        h.at(a, b) += eij;
      }
    }
  return h;
}

namespace {

// gauge substitution p1 = 0, p2x = 0 (dim 2 only): drop variables 0,1,2
Polynomial reduce_gauge(const Polynomial& p, std::size_t full_vars) {
  Polynomial s = p.substitute(0, 0).substitute(1, 0).substitute(2, 0);
  std::vector<int> map(full_vars);
  map[0] = map[1] = map[2] = -1;
  for (std::size_t k = 3; k < full_vars; ++k) map[k] = static_cast<int>(k - 3);
  return s.remap_variables(map, full_vars - 3);
}

std::vector<std::string> position_names(const FormationSpec& spec, bool gauge) {
  std::vector<std::string> names;
  const char* axis = "xyzw";
  for (int i = 0; i < spec.n; ++i)
    for (int c = 0; c < spec.dim; ++c)
      names.push_back("p" + std::to_string(i + 1) + axis[c]);
  if (gauge) names.erase(names.begin(), names.begin() + 3);
  return names;
}

std::vector<Polynomial> principal_minors(const SquareMatrix<Polynomial>& h, std::size_t nv,
                                         MinorMode mode, bool force, Exec exec) {
  const std::size_t nc = h.n;
  std::vector<std::vector<std::size_t>> index_sets;
  if (mode == MinorMode::Reduced) {
    const std::size_t k = nc - 3;  // trailing block size
    for (std::size_t len = 1; len <= k; ++len) {
      std::vector<std::size_t> idx;
      for (std::size_t t = 0; t < len; ++t) idx.push_back(nc - k + t);
      index_sets.push_back(std::move(idx));
    }
  } else {
    if (nc > 6 && !force)
      throw std::invalid_argument(
          "full minor mode generates " + std::to_string((std::uint64_t(1) << nc) - 1) +
          " principal minors for " + std::to_string(nc) +
          " coordinates; pass force to compute them anyway");
    for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << nc); ++mask) {
      std::vector<std::size_t> idx;
      for (std::size_t b = 0; b < nc; ++b)
        if (mask & (std::uint64_t(1) << b)) idx.push_back(b);
      index_sets.push_back(std::move(idx));
    }
  }
  std::vector<Polynomial> minors(index_sets.size());
  for_each_index(exec, static_cast<std::ptrdiff_t>(index_sets.size()), [&](std::ptrdiff_t mi) {
    const auto& idx = index_sets[static_cast<std::size_t>(mi)];
    SquareMatrix<Polynomial> sub(idx.size(), Polynomial::zero(nv));
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) sub.at(r, c) = h.at(idx[r], idx[c]);
    minors[static_cast<std::size_t>(mi)] = bareiss_determinant(std::move(sub), nv);
  });
  return minors;
}

}  // namespace

BuiltSet build_semialgebraic_set(const FormationSpec& spec, const SetBuildOptions& opts) {
  spec.validate();
  if (spec.dim != 2)
    throw std::invalid_argument("build_semialgebraic_set: only dimension 2 is supported");
  if (opts.gauge && spec.n < 2)
    throw std::invalid_argument("build_semialgebraic_set: gauge requires n >= 2");

  const std::size_t full_vars = ring_size(spec, false);
  std::vector<Polynomial> rows = equilibrium_rows(spec, false);
  Polynomial gpoly = error_norm_sq_polynomial(spec, false);
  SquareMatrix<Polynomial> h = hessian_polynomial(spec, false);

  std::size_t nv = full_vars;
  if (opts.gauge) {
    nv = full_vars - 3;
    for (auto& r : rows) r = reduce_gauge(r, full_vars);
    gpoly = reduce_gauge(gpoly, full_vars);
    for (auto& entry : h.data) entry = reduce_gauge(entry, full_vars);
  }

  BuiltSet built;
  built.set.nvars = nv;
  built.set.h_list = std::move(rows);
  built.set.g_list = {std::move(gpoly)};
  built.set.f_list = principal_minors(h, nv, opts.mode, opts.force_full, opts.exec);
  built.var_names = position_names(spec, opts.gauge);
  built.set.validate();
  return built;
}

Rational cayley_menger(const std::vector<Rational>& dbar_sq) {
  if (dbar_sq.size() != 6)
    throw std::invalid_argument("cayley_menger: six squared distances required (complete K4)");
  // edge order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4)
  auto w = [&](int i, int j) -> Rational {
    if (i > j) std::swap(i, j);
    static constexpr int idx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return dbar_sq[static_cast<std::size_t>(idx[i][j])];
  };
  SquareMatrix<Rational> m(5, Rational(0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w(i, j);
  for (int i = 0; i < 4; ++i) {
    m.at(static_cast<std::size_t>(i), 4) = 1;
    m.at(4, static_cast<std::size_t>(i)) = 1;
  }
  return bareiss_determinant(std::move(m));
}

Polynomial cayley_menger_polynomial(std::size_t nvars, std::size_t w_offset) {
  if (w_offset + 6 > nvars)
    throw std::invalid_argument("cayley_menger_polynomial: ring too small for six unknowns");
  static constexpr int idx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  SquareMatrix<Polynomial> m(5, Polynomial::zero(nvars));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j)
        m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            Polynomial::variable(nvars, w_offset + static_cast<std::size_t>(idx[i][j]));
  for (int i = 0; i < 4; ++i) {
    m.at(static_cast<std::size_t>(i), 4) = Polynomial::constant(nvars, 1);
    m.at(4, static_cast<std::size_t>(i)) = Polynomial::constant(nvars, 1);
  }
  return bareiss_determinant(std::move(m), nvars);
}

BuiltSet build_parametric_set(const FormationSpec& spec, const SetBuildOptions& opts) {
  spec.validate();
  if (spec.n != 4 || spec.dim != 2 || spec.edge_count() != 6)
    throw std::invalid_argument("build_parametric_set: requires the complete four-agent planar case");
  if (!opts.gauge)
    throw std::invalid_argument("build_parametric_set: gauge fixing is part of the construction");

  const std::size_t full_vars = ring_size(spec, true);  // 8 + 6
  std::vector<Polynomial> rows = equilibrium_rows(spec, true);
  Polynomial gpoly = error_norm_sq_polynomial(spec, true);
  SquareMatrix<Polynomial> h = hessian_polynomial(spec, true);

  const std::size_t nv = full_vars - 3;  // 11
  for (auto& r : rows) r = reduce_gauge(r, full_vars);
  gpoly = reduce_gauge(gpoly, full_vars);
  for (auto& entry : h.data) entry = reduce_gauge(entry, full_vars);

  BuiltSet built;
  built.set.nvars = nv;
  built.set.h_list = std::move(rows);
  built.set.h_list.push_back(cayley_menger_polynomial(nv, nv - 6));
  built.set.g_list = {std::move(gpoly)};
  built.set.f_list = principal_minors(h, nv, opts.mode, opts.force_full, opts.exec);
  for (std::size_t e = 0; e < 6; ++e)
    built.set.f_list.push_back(Polynomial::variable(nv, nv - 6 + e));

  built.var_names = position_names(spec, true);
  const char* tags[4] = {"1", "2", "3", "4"};
  for (const auto& [i, j] : spec.edges)
    built.var_names.push_back(std::string("w") + tags[i] + tags[j]);
  built.set.validate();
  return built;
}

Configuration gauge_align(const Configuration& p, int n, int dim) {
  if (dim != 2) throw std::invalid_argument("gauge_align: only dimension 2 is supported");
  if (p.size() != n * dim) throw std::invalid_argument("gauge_align: bad configuration length");
  Configuration out(p.size());
  const double dx = p[2] - p[0];
  const double dy = p[3] - p[1];
  const double r = std::hypot(dx, dy);
  // rotate p2-p1 onto the +y axis; fall back to identity when coincident
  const double ca = r > 0 ? dy / r : 1.0;
  const double sa = r > 0 ? dx / r : 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = p[2 * i] - p[0];
    const double y = p[2 * i + 1] - p[1];
    out[2 * i] = ca * x - sa * y;
    out[2 * i + 1] = sa * x + ca * y;
  }
  return out;
}

Eigen::VectorXd gauge_coordinates(const Configuration& aligned, int n, int dim) {
  if (dim != 2) throw std::invalid_argument("gauge_coordinates: only dimension 2 is supported");
  if (aligned.size() != n * dim)
    throw std::invalid_argument("gauge_coordinates: bad configuration length");
  Eigen::VectorXd v(n * dim - 3);
  for (int k = 3; k < n * dim; ++k) v[k - 3] = aligned[k];
  return v;
}

}  // namespace shapecert
