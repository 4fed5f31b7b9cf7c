#pragma once

#include <complex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "extcalc/errors.hpp"

namespace extcalc {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;

/// Shared numerical thresholds.  rank_tol is relative to the largest
/// singular value of the matrix at hand; eq_tol is an absolute threshold
/// for residuals of identities that hold exactly in the theory.
struct TolerancePolicy {
  double rank_tol = 1e-10;
  double eq_tol   = 1e-9;
};

double operator_norm(const Matrix& A);
double smallest_singular_value(const Matrix& A);
Eigen::Index numerical_rank(const Matrix& A, const TolerancePolicy& tol = {});

bool is_contraction(const Matrix& A, const TolerancePolicy& tol = {});
bool is_unitary(const Matrix& A, const TolerancePolicy& tol = {});

/// Defect operator D_Z = (I - Z^H Z)^{1/2} of a contraction Z (a square
/// positive semidefinite matrix on the column space of Z's domain).
/// Eigenvalues of I - Z^H Z in [-eq_tol, 0) are clamped to zero; anything
/// below -eq_tol raises NotAContraction.
Matrix defect(const Matrix& Z, const TolerancePolicy& tol = {});

/// Defect of the adjoint, D_{Z^H} = (I - Z Z^H)^{1/2}.
Matrix defect_adjoint(const Matrix& Z, const TolerancePolicy& tol = {});

/// Moore-Penrose pseudoinverse with rank decided by rank_tol * sigma_max.
Matrix pseudo_inverse(const Matrix& A, const TolerancePolicy& tol = {});

/// Orthonormal basis of the column space (rank columns).
Matrix column_space(const Matrix& A, const TolerancePolicy& tol = {});

/// Orthonormal basis of the null space.
Matrix null_space(const Matrix& A, const TolerancePolicy& tol = {});

/// A subspace of C^n carried as a matrix with orthonormal columns.
/// The zero subspace has a basis with zero columns.
class Subspace {
public:
  Subspace() = default;
  explicit Subspace(Eigen::Index ambient)
      : basis_(Matrix::Zero(ambient, 0)) {}

  /// Orthonormalizes the given spanning columns (rank-revealing).
  static Subspace from_columns(const Matrix& spanning,
                               const TolerancePolicy& tol = {});
  /// Trusts that the columns are already orthonormal.
  static Subspace from_orthonormal(const Matrix& onb);
  static Subspace full(Eigen::Index ambient);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const { return basis_ * basis_.adjoint(); }
  Vector project(const Vector& x) const { return basis_ * (basis_.adjoint() * x); }

  /// Orthogonal complement within the ambient space.
  Subspace complement(const TolerancePolicy& tol = {}) const;
  bool contains(const Vector& x, const TolerancePolicy& tol = {}) const;
  bool contains(const Subspace& other, const TolerancePolicy& tol = {}) const;
  bool same_as(const Subspace& other, const TolerancePolicy& tol = {}) const;

private:
  Matrix basis_{Matrix::Zero(0, 0)};
};

/// Intersection of two subspaces of the same ambient space, computed from
/// the null space of [basis_A, -basis_B].
Subspace subspace_meet(const Subspace& a, const Subspace& b,
                       const TolerancePolicy& tol = {});

/// Sum (span of union) of two subspaces.
Subspace subspace_join(const Subspace& a, const Subspace& b,
                       const TolerancePolicy& tol = {});

/// Schur complement of the leading split x split block:
///   T22 - T21 (T11 - pivot_shift)^{-1} T12.
/// pivot_shift must be split x split (pass a zero matrix for the plain
/// complement).  Raises SingularPivot when T11 - pivot_shift is singular
/// at the rank_tol scale.
Matrix schur_complement(const Matrix& T, Eigen::Index split,
                        const Matrix& pivot_shift,
                        const TolerancePolicy& tol = {});

/// Left polar decomposition T = abs * iso with abs = (T T^H)^{1/2} and
/// iso a partial isometry with initial space ran(T^H) and final space
/// ran(T).  Returned as (abs, iso).
std::pair<Matrix, Matrix> polar(const Matrix& T,
                                const TolerancePolicy& tol = {});

/// Principal square root of a positive semidefinite Hermitian matrix;
/// eigenvalues in [-eq_tol, 0) are clamped.
Matrix psd_sqrt(const Matrix& A, const TolerancePolicy& tol = {});

// --- seeded random generators used by the verification suites ---

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng);
/// Haar-ish random unitary via QR of a Gaussian matrix.
Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng);
/// Random strict contraction (norm <= shrink < 1).
Matrix random_contraction(Eigen::Index rows, Eigen::Index cols,
                          std::mt19937_64& rng, double shrink = 0.9);
/// Random isometry (cols <= rows).
Matrix random_isometry(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng);

} // namespace extcalc
