// Liouvillian assembly and steady-state solvers.
//
// Density matrices are vectorized column-major, vec(rho)[i + d j] = rho(i, j),
// so that vec(A rho B) = (B^T (x) A) vec(rho).

#pragma once

#include "cbh/model.hpp"
#include "cbh/qops.hpp"

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbh {

enum class SolveMethod { direct, propagate, automatic };

std::string to_string(SolveMethod m);
SolveMethod parse_solve_method(const std::string& s);

struct SolverConfig {
  double residual_tol = 1e-10;
  double truncation_tol = 1e-8;
  Index max_fock = 256;
  SolveMethod method = SolveMethod::automatic;
  double initial_dt = 0.0;    // propagation; 0 picks 0.01 / rate scale
  double max_time = 1e5;      // propagation
  double step_tol = 1e-9;     // propagation local error tolerance
  bool block_decomposition = true;

  void validate() const;
  /// Relative <a^dag a> change accepted between consecutive cutoffs.
  double occupation_tol() const { return 100.0 * truncation_tol; }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;            // || L vec(rho) ||_inf
  SolveMethod method = SolveMethod::direct;
  Index n_fock_used = 0;
  double tail_population = 0.0;     // population of the top three Fock levels
  double wall_time = 0.0;           // seconds
  double hermitization_correction = 0.0;
  double min_eigenvalue = 0.0;
  long steps = 0;                   // accepted propagation steps
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { multiple_steady_states, not_converged, max_fock_exceeded, numerical };

  SolverError(Kind kind, const std::string& what,
              double residual = std::numeric_limits<double>::quiet_NaN(),
              std::optional<SteadyStateResult> best = std::nullopt)
      : std::runtime_error(what), kind_(kind), residual_(residual), best_(std::move(best)) {}

  Kind kind() const { return kind_; }
  double residual() const { return residual_; }
  const std::optional<SteadyStateResult>& best() const { return best_; }

 private:
  Kind kind_;
  double residual_;
  std::optional<SteadyStateResult> best_;
};

struct ChannelSummary {
  double rate;
  std::string label;
};

struct Liouvillian {
  Index dim_hilbert = 0;
  Index n_fock = 0;          // field cutoff when on the atom (x) field space, else 0
  SparseMatrix matrix;       // d^2 x d^2
  std::vector<ChannelSummary> channels;
  double rate_scale = 1.0;   // max(channel rates, |H_ij|)

  ComplexVector apply(const ComplexVector& v) const { return matrix * v; }
};

ComplexVector vectorize(const DenseMatrix& rho);
DenseMatrix devectorize(const ComplexVector& v);

/// L = -i (1 (x) H - H^T (x) 1)
///     + sum_c rate_c [2 conj(c) (x) c - 1 (x) c^dag c - (c^dag c)^T (x) 1]
Liouvillian assemble(const Operator& h, std::span<const CollapseChannel> channels, Index n_fock = 0);

/// Solves L x = 0 with Tr(x) = 1. Degenerate kernels are reported as
/// SolverError::Kind::multiple_steady_states.
SteadyStateResult steady_state_direct(const Liouvillian& l, const SolverConfig& config = {});

/// Integrates d vec(rho)/dt = L vec(rho) with step-doubling RK4 until the
/// residual drops below `config.residual_tol`.
SteadyStateResult steady_state_evolve(const Liouvillian& l, const DensityMatrix& rho0,
                                      const SolverConfig& config = {});

/// Steady state at the fixed cutoff `params.n_fock`. For k = 0 the field is
/// a spectator and the state is (atomic steady state) (x) (thermal field).
SteadyStateResult solve_steady_state(const SystemParams& params, const SolverConfig& config = {});

/// Grows the cutoff by 1.5x from `params.n_fock` until the tail population
/// and the change in <a^dag a> are both within tolerance.
SteadyStateResult auto_truncate(const SystemParams& params, const SolverConfig& config = {});

/// Population of the top `levels` Fock levels of a 2 (x) n_fock state.
double tail_population(const DenseMatrix& rho, Index n_fock, Index levels = 3);

}  // namespace cbh
