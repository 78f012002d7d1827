#include "cbh/model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace cbh;
using cbh::test::max_abs;

namespace {

// Composite index of |atom, n>: atom factor first, |g> = 0, |e> = 1.
Index at(int atom, Index n, Index n_fock) { return atom * n_fock + n; }

SystemParams params(int k, double g) {
  SystemParams p;
  p.k = k;
  p.g = g;
  p.kappa = 0.1;
  p.n_th = 0.5;
  p.m_th = 0.5;
  p.n_fock = 6;
  return p;
}

}  // namespace

TEST(SystemParams, Validation) {
  EXPECT_NO_THROW(params(1, 1.0).validate());
  const auto bad = [](auto mutate) {
    SystemParams p = params(1, 1.0);
    mutate(p);
    return p;
  };
  EXPECT_THROW(bad([](SystemParams& p) { p.k = 3; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.k = -1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.g = -0.1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.kappa = -1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.n_th = -0.5; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.m_th = std::numeric_limits<double>::quiet_NaN(); }).validate(),
               std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.n_fock = 1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SystemParams& p) { p.g = 2.5; }).validate_figure_range(), std::invalid_argument);
  EXPECT_NO_THROW(bad([](SystemParams& p) { p.g = 2.0; }).validate_figure_range());
}

TEST(SystemParams, DefaultCutoff) {
  EXPECT_EQ(default_fock_cutoff(0.0), 20);
  EXPECT_EQ(default_fock_cutoff(1.0), 24);
  EXPECT_EQ(default_fock_cutoff(2.0), 36);
  SystemParams p = params(1, 1.0);
  p.n_th = 3.0;
  EXPECT_EQ(with_default_cutoff(p).n_fock, 48);
}

TEST(Hamiltonian, FirstSidebandMatrixElements) {
  const Index n = 6;
  const DenseMatrix h = hamiltonian(params(1, 0.7)).to_dense();
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-15);
  // sigma_- a maps |e, m> to sqrt(m) |g, m-1>.
  for (Index m = 1; m < n; ++m) {
    EXPECT_NEAR(h(at(0, m - 1, n), at(1, m, n)).real(), 0.7 * std::sqrt(static_cast<double>(m)), 1e-14);
  }
  EXPECT_EQ(h(at(0, 0, n), at(1, 0, n)), Complex(0.0));
}

TEST(Hamiltonian, SecondSidebandMatrixElements) {
  const Index n = 6;
  const DenseMatrix h = hamiltonian(params(2, 0.2)).to_dense();
  for (Index m = 2; m < n; ++m) {
    EXPECT_NEAR(h(at(0, m - 2, n), at(1, m, n)).real(), 0.2 * std::sqrt(static_cast<double>(m * (m - 1))), 1e-14);
  }
  EXPECT_EQ(h(at(0, 0, n), at(1, 1, n)), Complex(0.0));
}

TEST(Hamiltonian, CarrierActsOnAtomOnly) {
  const Index n = 6;
  const DenseMatrix h = hamiltonian(params(0, 1.3)).to_dense();
  for (Index m = 0; m < n; ++m) {
    EXPECT_NEAR(h(at(0, m, n), at(1, m, n)).real(), 1.3, 1e-15);
    EXPECT_NEAR(h(at(1, m, n), at(0, m, n)).real(), 1.3, 1e-15);
  }
  EXPECT_NEAR(max_abs(carrier_atom_hamiltonian(1.3).to_dense()), 1.3, 1e-15);
}

TEST(Hamiltonian, ComplexCouplingStaysHermitian) {
  const DenseMatrix h = interaction_hamiltonian(1, std::polar(0.8, 0.9), 5).to_dense();
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-15);
  EXPECT_NEAR(std::abs(h(at(0, 0, 5), at(1, 1, 5)) - std::polar(0.8, 0.9)), 0.0, 1e-15);
}

TEST(Collapse, ChannelOrderAndRates) {
  SystemParams p = params(1, 1.0);
  p.kappa = 0.3;
  p.gamma = 1.5;
  p.n_th = 0.25;
  p.m_th = 2.0;
  const std::vector<CollapseChannel> c = collapse_set(p);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0].rate, 0.3 * 1.25);
  EXPECT_DOUBLE_EQ(c[1].rate, 0.3 * 0.25);
  EXPECT_DOUBLE_EQ(c[2].rate, 1.5 * 3.0);
  EXPECT_DOUBLE_EQ(c[3].rate, 1.5 * 2.0);
  const CompositeOperators ops = composite_ops(p.n_fock);
  EXPECT_TRUE(c[0].op.to_dense() == ops.a.to_dense());
  EXPECT_TRUE(c[1].op.to_dense() == dagger(ops.a).to_dense());
  EXPECT_TRUE(c[2].op.to_dense() == ops.sigma_minus.to_dense());
  EXPECT_TRUE(c[3].op.to_dense() == ops.sigma_plus.to_dense());
  for (const CollapseChannel& ch : c) EXPECT_FALSE(ch.label.empty());

  const std::vector<CollapseChannel> atom = atom_collapse_set(p);
  ASSERT_EQ(atom.size(), 2u);
  EXPECT_EQ(atom[0].op.dim(), 2);
}

TEST(Composite, ExcitedProjector) {
  const CompositeOperators ops = composite_ops(3);
  EXPECT_LT(max_abs((ops.sigma_plus * ops.sigma_minus).to_dense() - ops.excited.to_dense()), 1e-15);
  EXPECT_EQ(ops.number.dim(), 6);
}

TEST(LambDicke, SidebandCouplings) {
  const LambDickeCouplings c = lamb_dicke_couplings(2.0, 0.1);
  EXPECT_DOUBLE_EQ(c.carrier, 1.0);
  EXPECT_DOUBLE_EQ(c.first, 0.1);
  EXPECT_NEAR(c.second, 0.005, 1e-16);
  EXPECT_FALSE(c.outside_lamb_dicke);
  EXPECT_TRUE(lamb_dicke_couplings(1.0, 0.5).outside_lamb_dicke);
  EXPECT_THROW(lamb_dicke_couplings(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(lamb_dicke_couplings(-1.0, 0.1), std::invalid_argument);
}
