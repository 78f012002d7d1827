#include "cbh/qops.hpp"

#include "components.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbh {

namespace {

bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

bool all_finite(const SparseMatrix& m) {
  const Complex* v = m.valuePtr();
  return std::all_of(v, v + m.nonZeros(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

template <class M>
void check_square_finite(const M& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": operator must be square and non-empty");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument(std::string(who) + ": operator has non-finite entries");
  }
}

void check_same_dim(const Operator& a, const Operator& b, const char* who) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

bool both_dense(const Operator& a, const Operator& b) {
  return a.representation() == Representation::dense &&
         b.representation() == Representation::dense;
}

}  // namespace

Operator::Operator(DenseMatrix m) : data_(std::move(m)) {
  check_square_finite(std::get<DenseMatrix>(data_), "Operator");
}

Operator::Operator(SparseMatrix m) : data_(std::move(m)) {
  auto& s = std::get<SparseMatrix>(data_);
  check_square_finite(s, "Operator");
  s.makeCompressed();
}

Operator Operator::automatic(SparseMatrix m) {
  if (m.rows() < kDenseBelowDim) return Operator(DenseMatrix(m));
  m.prune(Complex(0.0));
  return Operator(std::move(m));
}

Operator Operator::identity(Index dim) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return automatic(std::move(id));
}

Operator Operator::zero(Index dim) { return automatic(SparseMatrix(dim, dim)); }

Index Operator::dim() const {
  return std::visit([](const auto& m) { return m.rows(); }, data_);
}

Representation Operator::representation() const {
  return std::holds_alternative<DenseMatrix>(data_) ? Representation::dense
                                                    : Representation::sparse;
}

Complex Operator::coeff(Index row, Index col) const {
  if (row < 0 || col < 0 || row >= dim() || col >= dim()) {
    throw std::out_of_range("Operator::coeff: index out of range");
  }
  return std::visit([&](const auto& m) { return Complex(m.coeff(row, col)); }, data_);
}

Index Operator::nonzeros() const {
  if (const auto* d = std::get_if<DenseMatrix>(&data_)) {
    return (d->array() != Complex(0.0)).count();
  }
  return std::get<SparseMatrix>(data_).nonZeros();
}

DenseMatrix Operator::to_dense() const {
  if (const auto* d = std::get_if<DenseMatrix>(&data_)) return *d;
  return DenseMatrix(std::get<SparseMatrix>(data_));
}

SparseMatrix Operator::to_sparse() const {
  if (const auto* s = std::get_if<SparseMatrix>(&data_)) return *s;
  SparseMatrix s = std::get<DenseMatrix>(data_).sparseView();
  s.makeCompressed();
  return s;
}

Operator Operator::as(Representation r) const {
  return r == Representation::dense ? Operator(to_dense()) : Operator(to_sparse());
}

ComplexVector Operator::apply(const ComplexVector& v) const {
  if (v.size() != dim()) throw std::invalid_argument("Operator::apply: dimension mismatch");
  return std::visit([&](const auto& m) -> ComplexVector { return m * v; }, data_);
}

Operator operator+(const Operator& a, const Operator& b) {
  check_same_dim(a, b, "operator+");
  if (both_dense(a, b)) return Operator(DenseMatrix(a.to_dense() + b.to_dense()));
  return Operator::automatic(a.to_sparse() + b.to_sparse());
}

Operator operator-(const Operator& a, const Operator& b) {
  check_same_dim(a, b, "operator-");
  if (both_dense(a, b)) return Operator(DenseMatrix(a.to_dense() - b.to_dense()));
  return Operator::automatic(a.to_sparse() - b.to_sparse());
}

Operator operator*(const Operator& a, const Operator& b) {
  check_same_dim(a, b, "operator*");
  if (both_dense(a, b)) return Operator(DenseMatrix(a.to_dense() * b.to_dense()));
  return Operator::automatic(SparseMatrix(a.to_sparse() * b.to_sparse()));
}

Operator operator*(Complex s, const Operator& a) {
  if (a.representation() == Representation::dense) return Operator(DenseMatrix(s * a.to_dense()));
  return Operator::automatic(SparseMatrix(s * a.to_sparse()));
}

bool operator==(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) return false;
  return a.to_dense() == b.to_dense();
}

Operator dagger(const Operator& a) {
  if (a.representation() == Representation::dense) return Operator(DenseMatrix(a.to_dense().adjoint()));
  return Operator(SparseMatrix(a.to_sparse().adjoint()));
}

Operator transpose(const Operator& a) {
  if (a.representation() == Representation::dense) return Operator(DenseMatrix(a.to_dense().transpose()));
  return Operator(SparseMatrix(a.to_sparse().transpose()));
}

Operator conjugate(const Operator& a) {
  if (a.representation() == Representation::dense) return Operator(DenseMatrix(a.to_dense().conjugate()));
  return Operator(SparseMatrix(a.to_sparse().conjugate()));
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator power(const Operator& a, int p) {
  if (p < 0) throw std::invalid_argument("power: negative exponent");
  Operator result = Operator::identity(a.dim());
  for (int i = 0; i < p; ++i) result = result * a;
  return result;
}

Operator kron(const Operator& a, const Operator& b) {
  const auto limit = static_cast<Index>(std::numeric_limits<int>::max());
  if (a.dim() > limit / b.dim()) {
    throw std::length_error("kron: composite dimension overflows the index type");
  }
  if (both_dense(a, b) && a.dim() * b.dim() < kDenseBelowDim) {
    return Operator(DenseMatrix(Eigen::kroneckerProduct(a.to_dense(), b.to_dense())));
  }
  SparseMatrix out = Eigen::kroneckerProduct(a.to_sparse(), b.to_sparse());
  return Operator::automatic(std::move(out));
}

Operator destroy(Index n_fock) {
  if (n_fock < 2) throw std::invalid_argument("destroy: n_fock must be >= 2");
  SparseMatrix a(n_fock, n_fock);
  a.reserve(Eigen::VectorXi::Constant(n_fock, 1));
  for (Index n = 1; n < n_fock; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator::automatic(std::move(a));
}

Operator create(Index n_fock) { return dagger(destroy(n_fock)); }

Operator number(Index n_fock) { return create(n_fock) * destroy(n_fock); }

AtomOperators atom_ops() {
  DenseMatrix sm = DenseMatrix::Zero(2, 2);
  sm(0, 1) = 1.0;
  Operator minus(sm);
  Operator plus = dagger(minus);
  Operator z = plus * minus - minus * plus;
  return {minus, plus, z};
}

DensityMatrix::DensityMatrix(DenseMatrix m, Index n_fock) : matrix_(std::move(m)), n_fock_(n_fock) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
  }
  if (!matrix_.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
  if (n_fock_ < 0 || (n_fock_ > 0 && matrix_.rows() != 2 * n_fock_)) {
    throw std::invalid_argument("DensityMatrix: dimension does not match 2 * n_fock");
  }
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermiticityTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (max |rho - rho^dag| = " +
                                std::to_string(herm) + ")");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                std::to_string(std::abs(tr - 1.0)));
  }
}

double DensityMatrix::min_eigenvalue() const { return hermitian_eigenvalues(matrix_).minCoeff(); }

bool DensityMatrix::is_physical(double eigen_tol) const { return min_eigenvalue() >= -eigen_tol; }

Complex expect(const Operator& a, const DensityMatrix& rho) {
  if (a.dim() != rho.dim()) throw std::invalid_argument("expect: dimension mismatch");
  const DenseMatrix& r = rho.matrix();
  Complex sum = 0.0;
  if (a.representation() == Representation::dense) {
    // Tr(A rho) = sum_ij A_ij rho_ji
    sum = (a.to_dense().cwiseProduct(r.transpose())).sum();
  } else {
    const SparseMatrix s = a.to_sparse();
    for (Index col = 0; col < s.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(s, col); it; ++it) sum += it.value() * r(it.col(), it.row());
    }
  }
  return sum;
}

DenseMatrix thermal_field(Index n_fock, double occupation) {
  if (n_fock < 1) throw std::invalid_argument("thermal_field: n_fock must be positive");
  if (!(occupation >= 0.0)) throw std::invalid_argument("thermal_field: occupation must be >= 0");
  DenseMatrix rho = DenseMatrix::Zero(n_fock, n_fock);
  const double ratio = occupation / (occupation + 1.0);
  double p = 1.0;
  double total = 0.0;
  for (Index n = 0; n < n_fock; ++n) {
    rho(n, n) = p;
    total += p;
    p *= ratio;
  }
  return rho / total;
}

DenseMatrix thermal_atom(double occupation) {
  if (!(occupation >= 0.0)) throw std::invalid_argument("thermal_atom: occupation must be >= 0");
  DenseMatrix rho = DenseMatrix::Zero(2, 2);
  const double excited = occupation / (2.0 * occupation + 1.0);
  rho(0, 0) = 1.0 - excited;
  rho(1, 1) = excited;
  return rho;
}

DensityMatrix thermal_product(Index n_fock, double n_th, double m_th) {
  DenseMatrix rho = Eigen::kroneckerProduct(thermal_atom(m_th), thermal_field(n_fock, n_th));
  rho /= rho.trace();
  return DensityMatrix(std::move(rho), n_fock);
}

DensityMatrix basis_state(Index n_fock, int atom, Index fock) {
  if (atom < 0 || atom > 1 || fock < 0 || fock >= n_fock) {
    throw std::out_of_range("basis_state: index out of range");
  }
  DenseMatrix rho = DenseMatrix::Zero(2 * n_fock, 2 * n_fock);
  const Index i = atom * n_fock + fock;
  rho(i, i) = 1.0;
  return DensityMatrix(std::move(rho), n_fock);
}

DenseMatrix trace_out_field(const DensityMatrix& rho) {
  const Index nf = rho.n_fock();
  if (nf == 0) throw std::invalid_argument("trace_out_field: state is not on the atom x field space");
  DenseMatrix out = DenseMatrix::Zero(2, 2);
  for (Index a = 0; a < 2; ++a) {
    for (Index b = 0; b < 2; ++b) out(a, b) = rho.matrix().block(a * nf, b * nf, nf, nf).trace();
  }
  return out;
}

DenseMatrix trace_out_atom(const DensityMatrix& rho) {
  const Index nf = rho.n_fock();
  if (nf == 0) throw std::invalid_argument("trace_out_atom: state is not on the atom x field space");
  return rho.matrix().block(0, 0, nf, nf) + rho.matrix().block(nf, nf, nf, nf);
}

double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  const DenseMatrix diff = a - b;
  const DenseMatrix herm = 0.5 * (diff + diff.adjoint());
  return 0.5 * hermitian_eigenvalues(herm).cwiseAbs().sum();
}

Eigen::VectorXd hermitian_eigenvalues(const DenseMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  const Index n = h.rows();
  detail::DisjointSets sets(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (h(i, j) != Complex(0.0) || h(j, i) != Complex(0.0)) {
        sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  Eigen::VectorXd out(n);
  Index filled = 0;
  for (const auto& group : sets.groups()) {
    const auto m = static_cast<Index>(group.size());
    DenseMatrix block(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) block(a, b) = h(static_cast<Index>(group[a]), static_cast<Index>(group[b]));
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block, Eigen::EigenvaluesOnly);
    out.segment(filled, m) = es.eigenvalues();
    filled += m;
  }
  std::sort(out.data(), out.data() + n);
  return out;
}

}  // namespace cbh
