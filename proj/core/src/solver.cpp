#include "cbh/solver.hpp"

#include "components.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace cbh {

namespace {

using Clock = std::chrono::steady_clock;

// Condition estimates above this mark a component as numerically singular.
constexpr double kSingularCondition = 1e13;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double inf_norm(const ComplexVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// max row sum, an upper bound on the spectral radius
double gershgorin_radius(const SparseMatrix& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() == 0 ? 0.0 : rows.maxCoeff();
}

// Factorizes `a` and decides whether it is numerically nonsingular by
// solving against a fixed probe vector: ||a|| ||a^-1 b|| / ||b|| bounds the
// condition number from below.
bool factorize_nonsingular(const SparseMatrix& a, Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>& lu) {
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) return false;
  ComplexVector probe(a.rows());
  for (Index i = 0; i < probe.size(); ++i) probe(i) = Complex(1.0 + static_cast<double>(i % 7) / 7.0, 0.0);
  const ComplexVector y = lu.solve(probe);
  if (lu.info() != Eigen::Success || !y.allFinite()) return false;
  const double cond = gershgorin_radius(a) * inf_norm(y) / inf_norm(probe);
  return cond < kSingularCondition;
}

[[noreturn]] void throw_degenerate(const std::string& detail) {
  throw SolverError(SolverError::Kind::multiple_steady_states,
                    "steady state is not unique: " + detail);
}

// Solves L x = 0, Tr x = 1 on the index set `members` (all of which carry the
// trace). The trace functional is added onto the row of the first diagonal
// index, giving the square system (L + e_j t^T) x = e_j. Because t^T L = 0,
// any solution has t^T x = 1 and L x = 0.
ComplexVector solve_trace_block(const SparseMatrix& l, Index d, const std::vector<std::size_t>& members) {
  const auto n = static_cast<Index>(members.size());
  std::vector<Index> local(static_cast<std::size_t>(l.rows()), -1);
  for (Index i = 0; i < n; ++i) local[members[static_cast<std::size_t>(i)]] = i;

  Index anchor = -1;
  std::vector<Index> diag_local;
  for (Index i = 0; i < d; ++i) {
    const Index loc = local[static_cast<std::size_t>(i * (d + 1))];
    if (loc < 0) throw_degenerate("populations split across independent blocks");
    if (anchor < 0) anchor = loc;
    diag_local.push_back(loc);
  }

  std::vector<Eigen::Triplet<Complex>> trip;
  for (const std::size_t g : members) {
    const auto col = static_cast<Index>(g);
    for (SparseMatrix::InnerIterator it(l, col); it; ++it) {
      trip.emplace_back(local[static_cast<std::size_t>(it.row())], local[g], it.value());
    }
  }
  for (const Index c : diag_local) trip.emplace_back(anchor, c, Complex(1.0));

  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  if (!factorize_nonsingular(a, lu)) throw_degenerate("trace-augmented system is singular");
  ComplexVector rhs = ComplexVector::Zero(n);
  rhs(anchor) = 1.0;
  ComplexVector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw_degenerate("trace-augmented solve failed");
  return x;
}

SparseMatrix principal_block(const SparseMatrix& l, const std::vector<std::size_t>& members) {
  const auto n = static_cast<Index>(members.size());
  std::vector<Index> local(static_cast<std::size_t>(l.rows()), -1);
  for (Index i = 0; i < n; ++i) local[members[static_cast<std::size_t>(i)]] = i;
  std::vector<Eigen::Triplet<Complex>> trip;
  for (const std::size_t g : members) {
    for (SparseMatrix::InnerIterator it(l, static_cast<Index>(g)); it; ++it) {
      trip.emplace_back(local[static_cast<std::size_t>(it.row())], local[g], it.value());
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

// Hermitizes and renormalizes a raw solution, then packages diagnostics.
SteadyStateResult finish(const Liouvillian& l, DenseMatrix rho, SolveMethod method, long steps,
                         Clock::time_point start) {
  const DenseMatrix asym = rho - rho.adjoint();
  const double correction = 0.5 * (asym.size() ? asym.cwiseAbs().maxCoeff() : 0.0);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (!(std::isfinite(tr) && tr > 0.0)) {
    throw SolverError(SolverError::Kind::numerical, "steady state has non-positive trace");
  }
  rho /= tr;

  const double residual = inf_norm(l.apply(vectorize(rho)));
  DensityMatrix dm(std::move(rho), l.n_fock);
  const double min_eig = dm.min_eigenvalue();
  const double tail = l.n_fock > 0 ? tail_population(dm.matrix(), l.n_fock) : 0.0;
  return SteadyStateResult{std::move(dm), residual, method, l.n_fock, tail, seconds_since(start),
                           correction, min_eig, steps};
}

void check_result(const SteadyStateResult& r, const SolverConfig& config) {
  if (r.hermitization_correction > 1e-10) {
    throw SolverError(SolverError::Kind::numerical,
                      "Hermitization correction too large: " + std::to_string(r.hermitization_correction),
                      r.residual, r);
  }
  if (r.min_eigenvalue < -1e-8) {
    throw SolverError(SolverError::Kind::numerical,
                      "steady state is not positive semidefinite (min eigenvalue " +
                          std::to_string(r.min_eigenvalue) + ")",
                      r.residual, r);
  }
  if (r.residual > config.residual_tol) {
    std::ostringstream msg;
    msg << "steady-state residual " << r.residual << " exceeds tolerance " << config.residual_tol;
    throw SolverError(SolverError::Kind::not_converged, msg.str(), r.residual, r);
  }
}

ComplexVector rk4_step(const SparseMatrix& l, const ComplexVector& v, const ComplexVector& k1, double dt) {
  const ComplexVector k2 = l * (v + (0.5 * dt) * k1);
  const ComplexVector k3 = l * (v + (0.5 * dt) * k2);
  const ComplexVector k4 = l * (v + dt * k3);
  return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Complex vec_trace(const ComplexVector& v, Index d) {
  Complex tr = 0.0;
  for (Index i = 0; i < d; ++i) tr += v(i * (d + 1));
  return tr;
}

}  // namespace

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::direct:
      return "direct";
    case SolveMethod::propagate:
      return "propagate";
    case SolveMethod::automatic:
      return "auto";
  }
  return "auto";
}

SolveMethod parse_solve_method(const std::string& s) {
  if (s == "direct") return SolveMethod::direct;
  if (s == "propagate") return SolveMethod::propagate;
  if (s == "auto") return SolveMethod::automatic;
  throw std::invalid_argument("unknown solve method '" + s + "' (direct | propagate | auto)");
}

void SolverConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(residual_tol)) throw std::invalid_argument("SolverConfig: residual_tol must be > 0");
  if (!positive(truncation_tol)) throw std::invalid_argument("SolverConfig: truncation_tol must be > 0");
  if (!positive(max_time)) throw std::invalid_argument("SolverConfig: max_time must be > 0");
  if (!positive(step_tol)) throw std::invalid_argument("SolverConfig: step_tol must be > 0");
  if (!(initial_dt >= 0.0)) throw std::invalid_argument("SolverConfig: initial_dt must be >= 0");
  if (max_fock < 2) throw std::invalid_argument("SolverConfig: max_fock must be >= 2");
}

ComplexVector vectorize(const DenseMatrix& rho) {
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

DenseMatrix devectorize(const ComplexVector& v) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size() || d == 0) {
    throw std::invalid_argument("devectorize: length " + std::to_string(v.size()) +
                                " is not a positive perfect square");
  }
  return Eigen::Map<const DenseMatrix>(v.data(), d, d);
}

Liouvillian assemble(const Operator& h, std::span<const CollapseChannel> channels, Index n_fock) {
  const Index d = h.dim();
  if (n_fock > 0 && d != 2 * n_fock) throw std::invalid_argument("assemble: H dimension is not 2 * n_fock");
  SparseMatrix id(d, d);
  id.setIdentity();

  const SparseMatrix hs = h.to_sparse();
  const SparseMatrix ht = hs.transpose();
  SparseMatrix l = SparseMatrix(Eigen::kroneckerProduct(id, hs)) - SparseMatrix(Eigen::kroneckerProduct(ht, id));
  l = Complex(0.0, -1.0) * l;

  double scale = hs.nonZeros() ? hs.coeffs().cwiseAbs().maxCoeff() : 0.0;
  std::vector<ChannelSummary> summary;
  for (const auto& ch : channels) {
    if (ch.op.dim() != d) throw std::invalid_argument("assemble: channel '" + ch.label + "' dimension mismatch");
    if (!(std::isfinite(ch.rate) && ch.rate >= 0.0)) {
      throw std::invalid_argument("assemble: channel '" + ch.label + "' has a negative or non-finite rate");
    }
    summary.push_back({ch.rate, ch.label});
    if (ch.rate == 0.0) continue;
    scale = std::max(scale, ch.rate);
    const SparseMatrix c = ch.op.to_sparse();
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    const SparseMatrix cdct = cdc.transpose();
    SparseMatrix term = 2.0 * SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(c.conjugate()), c)) -
                        SparseMatrix(Eigen::kroneckerProduct(id, cdc)) -
                        SparseMatrix(Eigen::kroneckerProduct(cdct, id));
    l += Complex(ch.rate) * term;
  }
  l.prune(Complex(0.0));
  l.makeCompressed();
  return Liouvillian{d, n_fock, std::move(l), std::move(summary), scale > 0.0 ? scale : 1.0};
}

SteadyStateResult steady_state_direct(const Liouvillian& l, const SolverConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index d = l.dim_hilbert;
  const Index n = d * d;
  if (l.matrix.rows() != n || l.matrix.cols() != n) throw std::invalid_argument("steady_state_direct: malformed Liouvillian");

  ComplexVector x = ComplexVector::Zero(n);
  if (!config.block_decomposition) {
    std::vector<std::size_t> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    x = solve_trace_block(l.matrix, d, all);
  } else {
    detail::DisjointSets sets(static_cast<std::size_t>(n));
    for (Index col = 0; col < l.matrix.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(l.matrix, col); it; ++it) {
        sets.unite(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(col));
      }
    }
    const std::size_t trace_root = sets.find(0);
    for (Index i = 1; i < d; ++i) {
      if (sets.find(static_cast<std::size_t>(i * (d + 1))) != trace_root) {
        throw_degenerate("populations split across independent blocks");
      }
    }
    for (const auto& group : sets.groups()) {
      if (sets.find(group.front()) == trace_root) {
        const ComplexVector xb = solve_trace_block(l.matrix, d, group);
        for (std::size_t i = 0; i < group.size(); ++i) x(static_cast<Index>(group[i])) = xb(static_cast<Index>(i));
        continue;
      }
      // Traceless blocks must only admit the zero solution.
      Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
      if (!factorize_nonsingular(principal_block(l.matrix, group), lu)) {
        throw_degenerate("a traceless block of the Liouvillian has a kernel");
      }
    }
  }

  SteadyStateResult r = finish(l, devectorize(x), SolveMethod::direct, 0, start);
  check_result(r, config);
  return r;
}

SteadyStateResult steady_state_evolve(const Liouvillian& l, const DensityMatrix& rho0, const SolverConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index d = l.dim_hilbert;
  if (rho0.dim() != d) throw std::invalid_argument("steady_state_evolve: initial state dimension mismatch");

  // RK4 is stable for |lambda dt| up to ~2.8 near the real and imaginary axes.
  const double dt_max = 2.5 / std::max(gershgorin_radius(l.matrix), 1e-300);
  double dt = config.initial_dt > 0.0 ? config.initial_dt : 0.01 / l.rate_scale;
  dt = std::min(dt, dt_max);

  ComplexVector v = vectorize(rho0.matrix());
  double t = 0.0;
  long steps = 0;
  for (;;) {
    const ComplexVector k1 = l.matrix * v;
    const double residual = inf_norm(k1);
    if (residual < config.residual_tol) break;
    if (t >= config.max_time) {
      std::ostringstream msg;
      msg << "propagation did not reach residual " << config.residual_tol << " by t = " << t
          << " (final residual " << residual << ")";
      throw SolverError(SolverError::Kind::not_converged, msg.str(), residual);
    }
    const ComplexVector full = rk4_step(l.matrix, v, k1, dt);
    const ComplexVector half = rk4_step(l.matrix, v, k1, 0.5 * dt);
    const ComplexVector two_half = rk4_step(l.matrix, half, l.matrix * half, 0.5 * dt);
    const double err = inf_norm(full - two_half) / 15.0;
    if (!std::isfinite(err)) throw SolverError(SolverError::Kind::numerical, "propagation diverged", residual);
    if (err > config.step_tol) {
      dt *= 0.5;
      if (dt < 1e-14 * std::max(1.0, t)) {
        throw SolverError(SolverError::Kind::numerical, "propagation step size underflow", residual);
      }
      continue;
    }
    v = two_half;
    v /= vec_trace(v, d);
    t += dt;
    ++steps;
    if (err < config.step_tol / 64.0) dt = std::min(2.0 * dt, dt_max);
  }

  SteadyStateResult r = finish(l, devectorize(v), SolveMethod::propagate, steps, start);
  check_result(r, config);
  return r;
}

double tail_population(const DenseMatrix& rho, Index n_fock, Index levels) {
  if (rho.rows() != 2 * n_fock) throw std::invalid_argument("tail_population: dimension mismatch");
  const Index first = std::max<Index>(0, n_fock - levels);
  double tail = 0.0;
  for (Index atom = 0; atom < 2; ++atom) {
    for (Index n = first; n < n_fock; ++n) tail += rho(atom * n_fock + n, atom * n_fock + n).real();
  }
  return tail;
}

SteadyStateResult solve_steady_state(const SystemParams& params, const SolverConfig& config) {
  params.validate();
  config.validate();
  const auto start = Clock::now();
  const bool propagate = config.method == SolveMethod::propagate;

  if (params.k == 0) {
    // The carrier drive never touches the field, so the composite steady state
    // factorizes. With kappa = 0 the field is left in its reservoir state.
    const auto atom_channels = atom_collapse_set(params);
    const Liouvillian la = assemble(carrier_atom_hamiltonian(Complex(params.g, 0.0)), atom_channels);
    const SteadyStateResult atom =
        propagate ? steady_state_evolve(la, DensityMatrix(thermal_atom(params.m_th)), config)
                  : steady_state_direct(la, config);
    DenseMatrix rho = Eigen::kroneckerProduct(atom.rho.matrix(), thermal_field(params.n_fock, params.n_th));
    const auto channels = collapse_set(params);
    const Liouvillian full = assemble(hamiltonian(params), channels, params.n_fock);
    SteadyStateResult r = finish(full, std::move(rho), atom.method, atom.steps, start);
    check_result(r, config);
    return r;
  }

  const auto channels = collapse_set(params);
  const Liouvillian l = assemble(hamiltonian(params), channels, params.n_fock);
  if (propagate) return steady_state_evolve(l, thermal_product(params.n_fock, params.n_th, params.m_th), config);
  return steady_state_direct(l, config);
}

SteadyStateResult auto_truncate(const SystemParams& params, const SolverConfig& config) {
  params.validate();
  config.validate();
  if (params.n_fock > config.max_fock) {
    throw std::invalid_argument("auto_truncate: starting cutoff exceeds max_fock");
  }
  const auto number_of = [](const SteadyStateResult& r) {
    return expect(composite_ops(r.n_fock_used).number, r.rho).real();
  };

  SystemParams p = params;
  SteadyStateResult prev = solve_steady_state(p, config);
  double prev_n = number_of(prev);
  for (;;) {
    const auto next = static_cast<Index>(std::ceil(1.5 * static_cast<double>(p.n_fock)));
    if (next > config.max_fock) {
      std::ostringstream msg;
      msg << "Fock cutoff would exceed max_fock = " << config.max_fock << " (best cutoff " << p.n_fock
          << ", tail population " << prev.tail_population << ")";
      throw SolverError(SolverError::Kind::max_fock_exceeded, msg.str(), prev.residual, prev);
    }
    p.n_fock = next;
    SteadyStateResult cur = solve_steady_state(p, config);
    const double cur_n = number_of(cur);
    const double rel = std::abs(cur_n - prev_n) / std::max(cur_n, 1e-6);
    if (cur.tail_population < config.truncation_tol && rel < config.occupation_tol()) return cur;
    prev = std::move(cur);
    prev_n = cur_n;
  }
}

}  // namespace cbh
