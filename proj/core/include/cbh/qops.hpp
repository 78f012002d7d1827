// Finite-dimensional operator algebra on the atom (x) field Hilbert space.
//
// Basis convention used throughout the library: the atom factor comes first,
// the field factor second, and the atomic basis is (|g>, |e>) = (0, 1). A
// composite index is therefore i_atom * n_fock + i_field.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <variant>

namespace cbh {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using ComplexVector = Eigen::VectorXcd;

enum class Representation { dense, sparse };

/// Operators below this dimension are stored densely.
inline constexpr Index kDenseBelowDim = 16;

/// Immutable square complex operator, stored either dense or sparse.
///
/// Arithmetic results pick their storage with `Operator::automatic`: dense
/// below `kDenseBelowDim`, compressed sparse otherwise. Constructing from an
/// explicit matrix keeps the representation that was passed in, so the two
/// layouts of one operator can be compared directly.
class Operator {
 public:
  explicit Operator(DenseMatrix m);
  explicit Operator(SparseMatrix m);

  static Operator automatic(SparseMatrix m);
  static Operator identity(Index dim);
  static Operator zero(Index dim);

  Index dim() const;
  Representation representation() const;
  Complex coeff(Index row, Index col) const;
  Index nonzeros() const;

  DenseMatrix to_dense() const;
  SparseMatrix to_sparse() const;
  Operator as(Representation r) const;

  ComplexVector apply(const ComplexVector& v) const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);

  /// Exact elementwise equality, independent of representation.
  friend bool operator==(const Operator& a, const Operator& b);

 private:
  std::variant<DenseMatrix, SparseMatrix> data_;
};

Operator dagger(const Operator& a);
Operator transpose(const Operator& a);
Operator conjugate(const Operator& a);
Operator commutator(const Operator& a, const Operator& b);
/// a^power; power 0 gives the identity.
Operator power(const Operator& a, int power);

/// Tensor product. The composite index is i_a * dim(b) + i_b.
Operator kron(const Operator& a, const Operator& b);

/// Bosonic annihilation operator truncated to n_fock levels.
Operator destroy(Index n_fock);
Operator create(Index n_fock);
Operator number(Index n_fock);

struct AtomOperators {
  Operator sigma_minus;  // |g><e|
  Operator sigma_plus;   // |e><g|
  Operator sigma_z;      // sigma_+ sigma_- - sigma_- sigma_+
};

AtomOperators atom_ops();

/// Hermitian, unit-trace density matrix. Positivity is not enforced at
/// construction; query it with `min_eigenvalue`.
class DensityMatrix {
 public:
  static constexpr double kHermiticityTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;

  /// `n_fock` records the field cutoff of an atom (x) field state; pass 0
  /// for states that are not on the composite space.
  DensityMatrix(DenseMatrix m, Index n_fock = 0);

  Index dim() const { return matrix_.rows(); }
  Index n_fock() const { return n_fock_; }
  const DenseMatrix& matrix() const { return matrix_; }
  Complex operator()(Index r, Index c) const { return matrix_(r, c); }

  double min_eigenvalue() const;
  bool is_physical(double eigen_tol = 1e-10) const;

 private:
  DenseMatrix matrix_;
  Index n_fock_;
};

/// Tr(A rho). For Hermitian A the imaginary part is round-off.
Complex expect(const Operator& a, const DensityMatrix& rho);

/// Truncated Bose-Einstein state with mean occupation `occupation`,
/// renormalized over the kept levels.
DenseMatrix thermal_field(Index n_fock, double occupation);
/// Two-level state in equilibrium with a reservoir of mean occupation m:
/// rho_ee = m / (2m + 1).
DenseMatrix thermal_atom(double occupation);
DensityMatrix thermal_product(Index n_fock, double n_th, double m_th);
DensityMatrix basis_state(Index n_fock, int atom, Index fock);

/// Partial traces over the second (field) or first (atom) factor of a 2 (x) n_fock state.
DenseMatrix trace_out_field(const DensityMatrix& rho);
DenseMatrix trace_out_atom(const DensityMatrix& rho);

/// Eigenvalues (ascending) of a Hermitian matrix. Exact-zero block structure
/// is exploited: each connected block of the nonzero pattern is diagonalized
/// separately.
Eigen::VectorXd hermitian_eigenvalues(const DenseMatrix& h);

/// (1/2) || a - b ||_1 for Hermitian a, b.
double trace_distance(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace cbh
