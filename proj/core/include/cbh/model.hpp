// Driven two-level atom coupled to one bosonic mode through a k-th order
// blue-sideband interaction, with a thermal reservoir on each subsystem.
//
// Reduced units: the atomic decay rate gamma sets the rate scale
// (gamma = 1 by default) and hbar = k_B = 1.

#pragma once

#include "cbh/qops.hpp"

#include <string>
#include <vector>

namespace cbh {

struct SystemParams {
  int k = 1;             // sideband order: 0 carrier, 1 first, 2 second blue sideband
  double g = 0.0;        // effective coupling g_k (units of gamma)
  double kappa = 0.0;    // field damping rate
  double gamma = 1.0;    // atomic damping rate
  double n_th = 0.0;     // field-reservoir mean occupation
  double m_th = 0.0;     // atom-reservoir mean occupation
  Index n_fock = 20;     // Fock cutoff

  /// Throws std::invalid_argument when any field is out of range.
  void validate() const;
  /// Additionally requires 0 <= g, kappa <= 2 gamma, the range the figure
  /// presets were scanned over.
  void validate_figure_range() const;

  Index dim() const { return 2 * n_fock; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// max(20, ceil(12 (n_th + 1))): starting cutoff before auto-truncation.
Index default_fock_cutoff(double n_th);

/// `base` with the cutoff reset to `default_fock_cutoff(base.n_th)`.
SystemParams with_default_cutoff(SystemParams base);

struct CollapseChannel {
  double rate;     // multiplies the dissipator 2 A rho A^dag - A^dag A rho - rho A^dag A
  Operator op;
  std::string label;
};

/// Composite-space operators that observables are built from.
struct CompositeOperators {
  Operator a;             // 1 (x) a
  Operator number;        // 1 (x) a^dag a
  Operator sigma_minus;   // sigma_- (x) 1
  Operator sigma_plus;    // sigma_+ (x) 1
  Operator excited;       // sigma_+ sigma_- (x) 1
};

CompositeOperators composite_ops(Index n_fock);

/// g sigma_- a^k + conj(g) sigma_+ a^dag^k on the 2 n_fock composite space.
/// The complex overload exists for gauge checks; the model stores |g|.
Operator interaction_hamiltonian(int k, Complex g, Index n_fock);
Operator hamiltonian(const SystemParams& params);

/// The four thermal channels, in the order
/// (kappa (n_th+1), a), (kappa n_th, a^dag), (gamma (m_th+1), sigma_-), (gamma m_th, sigma_+).
std::vector<CollapseChannel> collapse_set(const SystemParams& params);

/// Atom-only pieces used when the field decouples (k = 0).
Operator carrier_atom_hamiltonian(Complex g);
std::vector<CollapseChannel> atom_collapse_set(const SystemParams& params);

struct LambDickeCouplings {
  double carrier;        // Omega / 2
  double first;          // eta Omega / 2
  double second;         // eta^2 Omega / 4
  bool outside_lamb_dicke;  // eta > 0.3
};

/// Sideband coupling magnitudes for Rabi frequency `rabi_frequency` and
/// Lamb-Dicke parameter `eta` in [0, 1). Phases are dropped.
LambDickeCouplings lamb_dicke_couplings(double rabi_frequency, double eta);

}  // namespace cbh
