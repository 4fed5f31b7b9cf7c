#include "extcalc/matkit.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace extcalc {

double operator_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

double smallest_singular_value(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Eigen::Index numerical_rank(const Matrix& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv(0), 1.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

bool is_contraction(const Matrix& A, const TolerancePolicy& tol) {
  return operator_norm(A) <= 1.0 + tol.eq_tol;
}

bool is_unitary(const Matrix& A, const TolerancePolicy& tol) {
  if (A.rows() != A.cols()) return false;
  const Matrix I = Matrix::Identity(A.rows(), A.cols());
  return operator_norm(A.adjoint() * A - I) <= tol.eq_tol &&
         operator_norm(A * A.adjoint() - I) <= tol.eq_tol;
}

Matrix psd_sqrt(const Matrix& A, const TolerancePolicy& tol) {
  if (A.rows() != A.cols())
    throw DimensionMismatch("psd_sqrt: matrix must be square");
  if (A.size() == 0) return A;
  Eigen::SelfAdjointEigenSolver<Matrix> es((A + A.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol.eq_tol)
      throw PreconditionViolated("psd_sqrt: matrix is not positive semidefinite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix defect(const Matrix& Z, const TolerancePolicy& tol) {
  const Matrix G = Matrix::Identity(Z.cols(), Z.cols()) - Z.adjoint() * Z;
  if (G.size() == 0) return G;
  Eigen::SelfAdjointEigenSolver<Matrix> es((G + G.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol.eq_tol)
      throw NotAContraction("defect: operator norm exceeds one");
    // Rank-decide on the Gram matrix, not on its square root: an
    // eigenvalue at roundoff scale would otherwise surface as a
    // sqrt(eps)-sized singular value and pollute every later rank cut.
    ev(i) = ev(i) < tol.rank_tol ? 0.0 : std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix defect_adjoint(const Matrix& Z, const TolerancePolicy& tol) {
  return defect(Matrix(Z.adjoint()), tol);
}

Matrix pseudo_inverse(const Matrix& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return Matrix::Zero(A.cols(), A.rows());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal().toDenseMatrix().cast<Complex>() *
         svd.matrixU().adjoint();
}

Matrix column_space(const Matrix& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return Matrix::Zero(A.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& A, const TolerancePolicy& tol) {
  if (A.rows() == 0) return Matrix::Identity(A.cols(), A.cols());
  if (A.cols() == 0) return Matrix::Zero(0, 0);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return svd.matrixV().rightCols(A.cols() - r);
}

Subspace Subspace::from_columns(const Matrix& spanning,
                                const TolerancePolicy& tol) {
  Subspace s;
  s.basis_ = column_space(spanning, tol);
  return s;
}

Subspace Subspace::from_orthonormal(const Matrix& onb) {
  Subspace s;
  s.basis_ = onb;
  return s;
}

Subspace Subspace::full(Eigen::Index ambient) {
  return from_orthonormal(Matrix::Identity(ambient, ambient));
}

Subspace Subspace::complement(const TolerancePolicy& tol) const {
  // Null space of basis^H gives the orthogonal complement.
  return Subspace::from_orthonormal(null_space(Matrix(basis_.adjoint()), tol));
}

bool Subspace::contains(const Vector& x, const TolerancePolicy& tol) const {
  const double scale = std::max(x.norm(), 1.0);
  return (x - project(x)).norm() <= tol.eq_tol * scale;
}

bool Subspace::contains(const Subspace& other, const TolerancePolicy& tol) const {
  for (Eigen::Index j = 0; j < other.dim(); ++j)
    if (!contains(Vector(other.basis().col(j)), tol)) return false;
  return true;
}

bool Subspace::same_as(const Subspace& other, const TolerancePolicy& tol) const {
  return dim() == other.dim() && contains(other, tol) && other.contains(*this, tol);
}

Subspace subspace_meet(const Subspace& a, const Subspace& b,
                       const TolerancePolicy& tol) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("subspace_meet: ambient dimensions differ");
  if (a.dim() == 0 || b.dim() == 0) return Subspace(a.ambient_dim());
  // x in both spans  <=>  x = A u = B v; stack [A, -B] and read the null space.
  Matrix stacked(a.ambient_dim(), a.dim() + b.dim());
  stacked << a.basis(), -b.basis();
  const Matrix null = null_space(stacked, tol);
  if (null.cols() == 0) return Subspace(a.ambient_dim());
  const Matrix reps = a.basis() * null.topRows(a.dim());
  return Subspace::from_columns(reps, tol);
}

Subspace subspace_join(const Subspace& a, const Subspace& b,
                       const TolerancePolicy& tol) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("subspace_join: ambient dimensions differ");
  Matrix stacked(a.ambient_dim(), a.dim() + b.dim());
  stacked << a.basis(), b.basis();
  return Subspace::from_columns(stacked, tol);
}

Matrix schur_complement(const Matrix& T, Eigen::Index split,
                        const Matrix& pivot_shift,
                        const TolerancePolicy& tol) {
  if (T.rows() != T.cols())
    throw DimensionMismatch("schur_complement: matrix must be square");
  if (split < 0 || split > T.rows())
    throw DimensionMismatch("schur_complement: split out of range");
  if (pivot_shift.rows() != split || pivot_shift.cols() != split)
    throw DimensionMismatch("schur_complement: pivot_shift must be split x split");
  const Eigen::Index rest = T.rows() - split;
  const Matrix T11 = T.topLeftCorner(split, split) - pivot_shift;
  const Matrix T12 = T.topRightCorner(split, rest);
  const Matrix T21 = T.bottomLeftCorner(rest, split);
  const Matrix T22 = T.bottomRightCorner(rest, rest);
  if (split == 0) return T22;
  if (numerical_rank(T11, tol) < split)
    throw SingularPivot("schur_complement: pivot block is singular");
  return T22 - T21 * T11.fullPivLu().solve(T12);
}

std::pair<Matrix, Matrix> polar(const Matrix& T, const TolerancePolicy& tol) {
  if (T.size() == 0)
    return {Matrix::Zero(T.rows(), T.rows()), Matrix::Zero(T.rows(), T.cols())};
  Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  const Matrix abs =
      svd.matrixU() * sv.asDiagonal().toDenseMatrix().cast<Complex>() *
      svd.matrixU().adjoint();
  const Matrix iso = svd.matrixU().leftCols(r) * svd.matrixV().leftCols(r).adjoint();
  return {abs, iso};
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      A(i, j) = Complex(gauss(rng), gauss(rng));
  return A;
}

Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix A = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ();
  // Fix the phases so the distribution does not degenerate.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = R(j, j);
    if (std::abs(d) > 0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

Matrix random_contraction(Eigen::Index rows, Eigen::Index cols,
                          std::mt19937_64& rng, double shrink) {
  if (rows == 0 || cols == 0) return Matrix::Zero(rows, cols);
  Matrix A = random_gaussian(rows, cols, rng);
  const double norm = operator_norm(A);
  if (norm > 0) A *= shrink / norm;
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  return A * unif(rng);
}

Matrix random_isometry(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  if (cols > rows)
    throw DimensionMismatch("random_isometry: needs cols <= rows");
  return random_unitary(rows, rng).leftCols(cols);
}

} // namespace extcalc
