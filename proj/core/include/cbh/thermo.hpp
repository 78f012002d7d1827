// Steady-state energies and reservoir-temperature response functions.
//
// A response function is C = dE/dT, the derivative of a subsystem's
// steady-state energy with respect to the temperature of the reservoir it is
// coupled to. Negative C means the subsystem cools when its reservoir heats.
// Derivatives are taken in occupation space by centered differences and
// converted with dm/dT; since dm/dT > 0 the sign of C never depends on the
// reference frequency.

#pragma once

#include "cbh/model.hpp"
#include "cbh/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cbh {

struct ReferenceFrequencies {
  double omega0 = 1.0;     // atomic transition frequency
  double nu = 1.0;         // bosonic mode frequency
  double omega_ref = 1.0;  // converts dE/dm to dE/dT when m_th = n_th are varied together

  void validate() const;
  friend bool operator==(const ReferenceFrequencies&, const ReferenceFrequencies&) = default;
};

/// Bose-Einstein occupation 1 / (exp(omega / T) - 1); T = 0 gives 0.
double occupation_from_temperature(double omega, double temperature);
/// omega / ln((m + 1) / m); throws for m <= 0.
double temperature_from_occupation(double omega, double occupation);
/// dm/dT = m (m + 1) [ln((m + 1) / m)]^2 / omega, with the m -> 0 limit 0.
double doccupation_dtemperature(double omega, double occupation);

struct ThermoPoint {
  double m_th = 0.0;
  double n_th = 0.0;
  double ea_over_omega0 = 0.0;  // <sigma_+ sigma_->, ground state at zero energy
  double ef_over_nu = 0.0;      // <a^dag a>
  double e_int = 0.0;           // Re <H_I>
  Index n_fock_used = 0;
  double residual = 0.0;
};

/// Observables of `rho`; `params.n_fock` must match the state's cutoff.
ThermoPoint energies(const DensityMatrix& rho, const SystemParams& params);
/// Auto-truncated steady state of `params` and its observables.
ThermoPoint steady_point(const SystemParams& params, const SolverConfig& config = {});

/// fd_step = max(1e-4, 1e-3 m).
double default_fd_step(double occupation);

struct ResponseOptions {
  double fd_step = 0.0;         // 0 selects default_fd_step
  bool richardson_check = true; // recompute at half step and flag > 1% changes
  bool center_point = true;     // also solve at the center for the energy columns
};

struct ResponsePoint {
  double occupation = 0.0;  // the varied reservoir occupation
  double c_atom = 0.0;
  double c_field = 0.0;
  ThermoPoint center;       // observables at the center (if requested)
  double fd_step = 0.0;
  bool flagged = false;     // Richardson or truncation check failed
  std::string note;
};

/// Both reservoirs at m_th = n_th = m. Atomic and field energies are in units
/// of omega0 and nu, both converted to temperature at omega_ref.
ResponsePoint response_common(const SystemParams& params, double m, const ReferenceFrequencies& freqs,
                              const SolverConfig& config = {}, const ResponseOptions& opts = {});

/// Only the atomic reservoir is varied (m_th = m, n_th = n_fixed); both
/// derivatives are converted to the atomic-reservoir temperature at omega0.
ResponsePoint response_atomic_fixed_n(const SystemParams& params, double m, double n_fixed,
                                      const ReferenceFrequencies& freqs, const SolverConfig& config = {},
                                      const ResponseOptions& opts = {});

/// Only the field reservoir is varied (n_th = n, m_th = m_fixed); both
/// derivatives are converted to the field-reservoir temperature at nu.
ResponsePoint response_field_fixed_m(const SystemParams& params, double n, double m_fixed,
                                     const ReferenceFrequencies& freqs, const SolverConfig& config = {},
                                     const ResponseOptions& opts = {});

/// Closed-form steady-state excited population of the resonantly driven
/// two-level atom (carrier, H = g (sigma_- + sigma_+)) in a thermal
/// reservoir, with the factor-2 dissipator:
///   rho_ee = 1/2 - (2m + 1) / (2 [(2m + 1)^2 + 2 (g/gamma)^2]).
double carrier_excited_population_oracle(double m, double g_over_gamma);

/// The printed carrier response formula,
///   -2 m (m+1) [ln((m+1)/m)]^2 [2 x - (2m+1)^2] / [2 x + (2m+1)^2]^2,
/// with x = (g/gamma)^2 and k_B = 1.
double carrier_response_analytic(double m, double g_over_gamma);

/// Largest occupation with non-positive carrier response: max(0, g/(sqrt2 gamma) - 1/2).
double cooling_threshold_carrier(double g_over_gamma);

/// Response of N non-interacting atoms.
double n_atoms_scale(double c_single, long n_atoms);

enum class ResponseMode { common, fixed_field, fixed_atom };
enum class Subsystem { atom, field };

std::string to_string(ResponseMode m);

struct ResponseSample {
  double occupation;
  double c_atom;
  double c_field;
  ThermoPoint point;
};

struct ResponseCurve {
  ResponseMode mode = ResponseMode::common;
  std::vector<ResponseSample> samples;  // strictly increasing occupation
  SystemParams params;
  double fd_step = 0.0;                 // 0: per-point default

  void validate() const;
};

struct ZeroCrossing {
  double location;
  int sign_changes;  // > 1 means only the smallest crossing was refined
};

/// Evaluates C(occupation) afresh; used to refine a bracketed crossing.
using ResponseEvaluator = std::function<double(double)>;

/// First sign change of the chosen response along the curve, refined by
/// bisection with `evaluate` to `tol` (linear interpolation when no
/// evaluator is given). Returns nullopt when the sign never changes.
std::optional<ZeroCrossing> find_zero_crossing(const ResponseCurve& curve, Subsystem which,
                                               const ResponseEvaluator& evaluate = {}, double tol = 1e-3);

}  // namespace cbh
