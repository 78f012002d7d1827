#include "cbh/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbh {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

using Setter = SystemParams (*)(SystemParams, double);

SystemParams set_common(SystemParams p, double x) {
  p.m_th = x;
  p.n_th = x;
  return p;
}

SystemParams set_atom_reservoir(SystemParams p, double x) {
  p.m_th = x;
  return p;
}

SystemParams set_field_reservoir(SystemParams p, double x) {
  p.n_th = x;
  return p;
}

SystemParams at_cutoff(SystemParams p, Index n_fock) {
  p.n_fock = n_fock;
  return p;
}

ThermoPoint solve_point(const SystemParams& p, const SolverConfig& config) {
  const SteadyStateResult r = solve_steady_state(p, config);
  ThermoPoint t = energies(r.rho, p);
  t.n_fock_used = r.n_fock_used;
  t.residual = r.residual;
  return t;
}

struct Derivative {
  double atom;
  double field;
  double tail;
};

Derivative centered(const SystemParams& base, Setter set, double x, double h, Index n_fock,
                    const SolverConfig& config, const ThermoPoint* hi_known) {
  const SystemParams p_hi = at_cutoff(set(base, x + h), n_fock);
  const SystemParams p_lo = at_cutoff(set(base, x - h), n_fock);
  const ThermoPoint hi = hi_known ? *hi_known : solve_point(p_hi, config);
  const SteadyStateResult lo_r = solve_steady_state(p_lo, config);
  ThermoPoint lo = energies(lo_r.rho, p_lo);
  return {(hi.ea_over_omega0 - lo.ea_over_omega0) / (2.0 * h), (hi.ef_over_nu - lo.ef_over_nu) / (2.0 * h),
          lo_r.tail_population};
}

bool richardson_ok(double coarse, double fine) {
  return std::abs(coarse - fine) <= 0.01 * std::abs(fine) + 1e-8;
}

void append_note(ResponsePoint& r, const std::string& note) {
  r.flagged = true;
  if (!r.note.empty()) r.note += ";";
  r.note += note;
}

ResponsePoint response_along(const SystemParams& params, Setter set, double x, double omega_atom,
                             double omega_field, const SolverConfig& config, const ResponseOptions& opts) {
  params.validate();
  config.validate();
  const double h = opts.fd_step > 0.0 ? opts.fd_step : default_fd_step(x);
  if (!(std::isfinite(x) && x > h)) {
    throw std::invalid_argument("response: occupation must exceed the finite-difference step");
  }

  // The highest-occupation point needs the most Fock levels; every other
  // point of the stencil reuses its cutoff so truncation error cancels.
  SystemParams hi = set(params, x + h);
  hi.n_fock = std::max(params.n_fock, default_fock_cutoff(hi.n_th));
  hi.n_fock = std::min(hi.n_fock, config.max_fock);
  const SteadyStateResult hi_r = auto_truncate(hi, config);
  const Index n_fock = hi_r.n_fock_used;
  ThermoPoint hi_point = energies(hi_r.rho, at_cutoff(hi, n_fock));

  const Derivative d = centered(params, set, x, h, n_fock, config, &hi_point);
  const double to_t_atom = doccupation_dtemperature(omega_atom, x);
  const double to_t_field = doccupation_dtemperature(omega_field, x);

  ResponsePoint out;
  out.occupation = x;
  out.fd_step = h;
  out.c_atom = d.atom * to_t_atom;
  out.c_field = d.field * to_t_field;
  if (d.tail > config.truncation_tol) append_note(out, "tail");

  if (opts.richardson_check) {
    const Derivative fine = centered(params, set, x, 0.5 * h, n_fock, config, nullptr);
    if (!richardson_ok(out.c_atom, fine.atom * to_t_atom)) append_note(out, "richardson-atom");
    if (!richardson_ok(out.c_field, fine.field * to_t_field)) append_note(out, "richardson-field");
  }
  if (opts.center_point) {
    out.center = solve_point(at_cutoff(set(params, x), n_fock), config);
  } else {
    out.center = hi_point;
  }
  return out;
}

}  // namespace

void ReferenceFrequencies::validate() const {
  if (!positive_finite(omega0) || !positive_finite(nu) || !positive_finite(omega_ref)) {
    throw std::invalid_argument("ReferenceFrequencies: all frequencies must be > 0");
  }
}

double occupation_from_temperature(double omega, double temperature) {
  if (!positive_finite(omega)) throw std::invalid_argument("occupation_from_temperature: omega must be > 0");
  if (!(temperature >= 0.0)) throw std::invalid_argument("occupation_from_temperature: T must be >= 0");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

double temperature_from_occupation(double omega, double occupation) {
  if (!positive_finite(omega)) throw std::invalid_argument("temperature_from_occupation: omega must be > 0");
  if (!(occupation > 0.0) || !std::isfinite(occupation)) {
    throw std::invalid_argument("temperature_from_occupation: occupation must be > 0 (zero has no finite temperature)");
  }
  return omega / std::log1p(1.0 / occupation);
}

double doccupation_dtemperature(double omega, double occupation) {
  if (!positive_finite(omega)) throw std::invalid_argument("doccupation_dtemperature: omega must be > 0");
  if (!(occupation >= 0.0)) throw std::invalid_argument("doccupation_dtemperature: occupation must be >= 0");
  if (occupation == 0.0) return 0.0;
  const double l = std::log1p(1.0 / occupation);
  return occupation * (occupation + 1.0) * l * l / omega;
}

ThermoPoint energies(const DensityMatrix& rho, const SystemParams& params) {
  params.validate();
  if (rho.dim() != params.dim()) throw std::invalid_argument("energies: state dimension does not match params");
  const CompositeOperators ops = composite_ops(params.n_fock);
  ThermoPoint t;
  t.m_th = params.m_th;
  t.n_th = params.n_th;
  t.ea_over_omega0 = expect(ops.excited, rho).real();
  t.ef_over_nu = expect(ops.number, rho).real();
  t.e_int = expect(hamiltonian(params), rho).real();
  t.n_fock_used = params.n_fock;
  return t;
}

ThermoPoint steady_point(const SystemParams& params, const SolverConfig& config) {
  const SteadyStateResult r = auto_truncate(params, config);
  SystemParams p = params;
  p.n_fock = r.n_fock_used;
  ThermoPoint t = energies(r.rho, p);
  t.residual = r.residual;
  return t;
}

double default_fd_step(double occupation) { return std::max(1e-4, 1e-3 * occupation); }

ResponsePoint response_common(const SystemParams& params, double m, const ReferenceFrequencies& freqs,
                              const SolverConfig& config, const ResponseOptions& opts) {
  freqs.validate();
  return response_along(params, set_common, m, freqs.omega_ref, freqs.omega_ref, config, opts);
}

ResponsePoint response_atomic_fixed_n(const SystemParams& params, double m, double n_fixed,
                                      const ReferenceFrequencies& freqs, const SolverConfig& config,
                                      const ResponseOptions& opts) {
  freqs.validate();
  if (!(n_fixed >= 0.0)) throw std::invalid_argument("response_atomic_fixed_n: n_fixed must be >= 0");
  SystemParams p = params;
  p.n_th = n_fixed;
  return response_along(p, set_atom_reservoir, m, freqs.omega0, freqs.omega0, config, opts);
}

ResponsePoint response_field_fixed_m(const SystemParams& params, double n, double m_fixed,
                                     const ReferenceFrequencies& freqs, const SolverConfig& config,
                                     const ResponseOptions& opts) {
  freqs.validate();
  if (!(m_fixed >= 0.0)) throw std::invalid_argument("response_field_fixed_m: m_fixed must be >= 0");
  SystemParams p = params;
  p.m_th = m_fixed;
  return response_along(p, set_field_reservoir, n, freqs.nu, freqs.nu, config, opts);
}

double carrier_excited_population_oracle(double m, double g_over_gamma) {
  if (!(m >= 0.0)) throw std::invalid_argument("carrier_excited_population_oracle: m must be >= 0");
  const double y = 2.0 * m + 1.0;
  const double x = g_over_gamma * g_over_gamma;
  return 0.5 - y / (2.0 * (y * y + 2.0 * x));
}

double carrier_response_analytic(double m, double g_over_gamma) {
  if (!(m >= 0.0)) throw std::invalid_argument("carrier_response_analytic: m must be >= 0");
  if (m == 0.0) return 0.0;
  const double l = std::log1p(1.0 / m);
  const double y2 = (2.0 * m + 1.0) * (2.0 * m + 1.0);
  const double x2 = 2.0 * g_over_gamma * g_over_gamma;
  return -2.0 * m * (m + 1.0) * l * l * (x2 - y2) / ((x2 + y2) * (x2 + y2));
}

double cooling_threshold_carrier(double g_over_gamma) {
  return std::max(0.0, g_over_gamma / std::sqrt(2.0) - 0.5);
}

double n_atoms_scale(double c_single, long n_atoms) {
  if (n_atoms < 1) throw std::invalid_argument("n_atoms_scale: n_atoms must be >= 1");
  return static_cast<double>(n_atoms) * c_single;
}

std::string to_string(ResponseMode m) {
  switch (m) {
    case ResponseMode::common:
      return "common-occupation";
    case ResponseMode::fixed_field:
      return "fixed-field-occupation";
    case ResponseMode::fixed_atom:
      return "fixed-atom-occupation";
  }
  return "common-occupation";
}

void ResponseCurve::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("ResponseCurve: need at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].c_atom) || !std::isfinite(samples[i].c_field)) {
      throw std::invalid_argument("ResponseCurve: non-finite response value");
    }
    if (i > 0 && !(samples[i].occupation > samples[i - 1].occupation)) {
      throw std::invalid_argument("ResponseCurve: occupations must be strictly increasing");
    }
  }
}

std::optional<ZeroCrossing> find_zero_crossing(const ResponseCurve& curve, Subsystem which,
                                               const ResponseEvaluator& evaluate, double tol) {
  curve.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("find_zero_crossing: tol must be > 0");
  const auto value = [which](const ResponseSample& s) { return which == Subsystem::atom ? s.c_atom : s.c_field; };

  int changes = 0;
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
    const double a = value(curve.samples[i]);
    const double b = value(curve.samples[i + 1]);
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
      ++changes;
      if (!first) first = i;
    }
  }
  if (!first) return std::nullopt;

  double lo = curve.samples[*first].occupation;
  double hi = curve.samples[*first + 1].occupation;
  double f_lo = value(curve.samples[*first]);
  double f_hi = value(curve.samples[*first + 1]);
  if (f_hi == 0.0) return ZeroCrossing{hi, changes};
  if (!evaluate) return ZeroCrossing{lo + (hi - lo) * f_lo / (f_lo - f_hi), changes};

  while (0.5 * (hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = evaluate(mid);
    if (!std::isfinite(f_mid)) throw std::runtime_error("find_zero_crossing: evaluator returned a non-finite value");
    if (f_mid == 0.0) return ZeroCrossing{mid, changes};
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return ZeroCrossing{0.5 * (lo + hi), changes};
}

}  // namespace cbh
