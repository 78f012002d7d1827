#include "cbh/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbh {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("SystemParams: " + what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void SystemParams::validate() const {
  require(k >= 0 && k <= 2, "k must be 0, 1 or 2 (got " + std::to_string(k) + ")");
  require(finite_nonneg(g), "g must be finite and >= 0");
  require(finite_nonneg(kappa), "kappa must be finite and >= 0");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be finite and > 0");
  require(finite_nonneg(n_th), "n_th must be finite and >= 0");
  require(finite_nonneg(m_th), "m_th must be finite and >= 0");
  require(n_fock >= 2, "n_fock must be >= 2");
}

void SystemParams::validate_figure_range() const {
  validate();
  require(g <= 2.0 * gamma, "figure presets need g <= 2 gamma");
  require(kappa <= 2.0 * gamma, "figure presets need kappa <= 2 gamma");
}

Index default_fock_cutoff(double n_th) {
  return std::max<Index>(20, static_cast<Index>(std::ceil(12.0 * (n_th + 1.0))));
}

SystemParams with_default_cutoff(SystemParams base) {
  base.n_fock = default_fock_cutoff(base.n_th);
  return base;
}

CompositeOperators composite_ops(Index n_fock) {
  const Operator id_atom = Operator::identity(2);
  const Operator id_field = Operator::identity(n_fock);
  const Operator a = destroy(n_fock);
  const AtomOperators at = atom_ops();
  return {
      kron(id_atom, a),
      kron(id_atom, dagger(a) * a),
      kron(at.sigma_minus, id_field),
      kron(at.sigma_plus, id_field),
      kron(at.sigma_plus * at.sigma_minus, id_field),
  };
}

Operator interaction_hamiltonian(int k, Complex g, Index n_fock) {
  if (k < 0 || k > 2) throw std::invalid_argument("interaction_hamiltonian: k must be 0, 1 or 2");
  const AtomOperators at = atom_ops();
  const Operator ak = power(destroy(n_fock), k);
  const Operator lower = kron(at.sigma_minus, ak);
  return g * lower + std::conj(g) * dagger(lower);
}

Operator hamiltonian(const SystemParams& params) {
  params.validate();
  return interaction_hamiltonian(params.k, Complex(params.g, 0.0), params.n_fock);
}

std::vector<CollapseChannel> collapse_set(const SystemParams& params) {
  params.validate();
  const CompositeOperators ops = composite_ops(params.n_fock);
  return {
      {params.kappa * (params.n_th + 1.0), ops.a, "kappa(n_th+1) a"},
      {params.kappa * params.n_th, dagger(ops.a), "kappa n_th a^dag"},
      {params.gamma * (params.m_th + 1.0), ops.sigma_minus, "gamma(m_th+1) sigma_-"},
      {params.gamma * params.m_th, ops.sigma_plus, "gamma m_th sigma_+"},
  };
}

Operator carrier_atom_hamiltonian(Complex g) {
  const AtomOperators at = atom_ops();
  return g * at.sigma_minus + std::conj(g) * at.sigma_plus;
}

std::vector<CollapseChannel> atom_collapse_set(const SystemParams& params) {
  params.validate();
  const AtomOperators at = atom_ops();
  return {
      {params.gamma * (params.m_th + 1.0), at.sigma_minus, "gamma(m_th+1) sigma_-"},
      {params.gamma * params.m_th, at.sigma_plus, "gamma m_th sigma_+"},
  };
}

LambDickeCouplings lamb_dicke_couplings(double rabi_frequency, double eta) {
  if (!(std::isfinite(rabi_frequency) && rabi_frequency > 0.0)) {
    throw std::invalid_argument("lamb_dicke_couplings: Rabi frequency must be > 0");
  }
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::invalid_argument("lamb_dicke_couplings: eta must lie in [0, 1)");
  }
  return {rabi_frequency / 2.0, eta * rabi_frequency / 2.0, eta * eta * rabi_frequency / 4.0,
          eta > 0.3};
}

}  // namespace cbh
