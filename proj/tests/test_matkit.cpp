#include "doctest.h"

#include "extcalc/matkit.hpp"

#include <random>

using namespace extcalc;

namespace {

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const Complex I1{0.0, 1.0};

} // namespace

TEST_CASE("defect of the zero matrix is the identity") {
  const Matrix Z = Matrix::Zero(2, 2);
  CHECK(operator_norm(defect(Z) - Matrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("defect of a unitary vanishes") {
  std::mt19937_64 rng(7);
  const Matrix U = random_unitary(4, rng);
  CHECK(is_unitary(U));
  CHECK(operator_norm(defect(U)) < 1e-7);
}

TEST_CASE("defect of the nilpotent shift block") {
  const Matrix Z = mat2(0, 1, 0, 0);
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  CHECK(operator_norm(defect(Z) - expect) < 1e-12);
}

TEST_CASE("defect rejects expansions") {
  const Matrix Z = 2.0 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(defect(Z), NotAContraction);
}

TEST_CASE("defect identity norm(Zx)^2 + norm(D_Z x)^2 = norm(x)^2") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix Z = random_contraction(5, 5, rng);
    const Matrix D = defect(Z);
    CHECK(operator_norm(D - D.adjoint()) < 1e-10);
    const Vector x = random_gaussian(5, 1, rng).col(0);
    const double lhs = std::norm((Z * x).norm()) + std::norm((D * x).norm());
    CHECK(std::abs(lhs - std::norm(x.norm())) < 1e-9);
  }
}

TEST_CASE("intertwining Z^H D_{Z^H} = D_Z Z^H") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Matrix Z = random_contraction(4, 4, rng);
    const Matrix lhs = Z.adjoint() * defect_adjoint(Z);
    const Matrix rhs = defect(Z) * Z.adjoint();
    CHECK(operator_norm(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("subspace_meet of coordinate axes") {
  Matrix e1 = Matrix::Zero(3, 1), e2 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  const auto A = Subspace::from_columns(e1);
  const auto B = Subspace::from_columns(e2);
  CHECK(subspace_meet(A, B).dim() == 0);
}

TEST_CASE("subspace_meet of overlapping planes") {
  Matrix AB = Matrix::Zero(4, 2), BC = Matrix::Zero(4, 2);
  AB(0, 0) = 1.0;
  AB(1, 1) = 1.0;
  BC(1, 0) = 1.0;
  BC(2, 1) = 1.0;
  const auto M =
      subspace_meet(Subspace::from_columns(AB), Subspace::from_columns(BC));
  REQUIRE(M.dim() == 1);
  Vector e2 = Vector::Zero(4);
  e2(1) = 1.0;
  CHECK(M.contains(e2));
}

TEST_CASE("subspace_meet matches the stacked-projector null space") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto A = Subspace::from_columns(random_gaussian(5, 3, rng));
    const auto B = Subspace::from_columns(random_gaussian(5, 3, rng));
    const auto M = subspace_meet(A, B);

    // Oracle: x in A meet B iff (I - P_A) x = 0 and (I - P_B) x = 0.
    Matrix stacked(10, 5);
    stacked.topRows(5) = Matrix::Identity(5, 5) - A.projector();
    stacked.bottomRows(5) = Matrix::Identity(5, 5) - B.projector();
    const auto oracle = Subspace::from_columns(null_space(stacked));
    CHECK(M.same_as(oracle));
    CHECK(A.contains(M));
    CHECK(B.contains(M));
    CHECK(subspace_meet(B, A).same_as(M));
  }
}

TEST_CASE("schur_complement of a block-diagonal matrix") {
  Matrix T = Matrix::Zero(4, 4);
  T.topLeftCorner(2, 2) = mat2(1, 2, 3, 4);
  T.bottomRightCorner(2, 2) = mat2(5, 6, 7, 8);
  const Matrix S = schur_complement(T, 2, Matrix::Zero(2, 2));
  CHECK(operator_norm(S - T.bottomRightCorner(2, 2)) < 1e-14);
}

TEST_CASE("schur_complement scalar example") {
  const Matrix T = mat2(2, 1, 1, 1);
  const Matrix S = schur_complement(T, 1, Matrix::Zero(1, 1));
  CHECK(std::abs(S(0, 0) - Complex{0.5, 0.0}) < 1e-14);
}

TEST_CASE("schur_complement with a pivot shift") {
  const Matrix T = mat2(0, 1, 1, 0);
  const Matrix S = schur_complement(T, 1, Matrix::Identity(1, 1));
  CHECK(std::abs(S(0, 0) - Complex{1.0, 0.0}) < 1e-14);
}

TEST_CASE("schur_complement reports a singular pivot") {
  const Matrix T = mat2(1, 1, 1, 1);
  CHECK_THROWS_AS(schur_complement(T, 1, Matrix::Identity(1, 1)),
                  SingularPivot);
}

TEST_CASE("polar of simple matrices") {
  const auto [absI, isoI] = extcalc::polar(Matrix::Identity(3, 3));
  CHECK(operator_norm(absI - Matrix::Identity(3, 3)) < 1e-12);
  CHECK(operator_norm(isoI - Matrix::Identity(3, 3)) < 1e-12);

  const auto [abs0, iso0] = extcalc::polar(Matrix::Zero(2, 2));
  CHECK(operator_norm(abs0) < 1e-12);
  CHECK(operator_norm(iso0) < 1e-12);

  const Matrix T = mat2(0, 2, 0, 0);
  const auto [a, v] = extcalc::polar(T);
  Matrix expect_abs = Matrix::Zero(2, 2);
  expect_abs(0, 0) = 2.0;
  CHECK(operator_norm(a - expect_abs) < 1e-12);
  CHECK(operator_norm(v - mat2(0, 1, 0, 0)) < 1e-12);
}

TEST_CASE("polar reconstructs random matrices") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 10; ++t) {
    const Matrix T = random_gaussian(4, 6, rng);
    const auto [a, v] = extcalc::polar(T);
    CHECK(operator_norm(T - a * v) < 1e-9);
    // Partial isometry: v v^H is a projector.
    const Matrix p = v * v.adjoint();
    CHECK(operator_norm(p * p - p) < 1e-9);
  }
}

TEST_CASE("pseudo_inverse solves consistent systems") {
  std::mt19937_64 rng(23);
  const Matrix A = random_gaussian(5, 3, rng);
  const Matrix Ap = pseudo_inverse(A);
  CHECK(operator_norm(A * Ap * A - A) < 1e-9);
  CHECK(operator_norm(Ap * A * Ap - Ap) < 1e-9);
}

TEST_CASE("psd_sqrt squares back") {
  std::mt19937_64 rng(29);
  const Matrix G = random_gaussian(4, 4, rng);
  const Matrix A = G * G.adjoint();
  const Matrix R = psd_sqrt(A);
  CHECK(operator_norm(R * R - A) < 1e-8);
}

TEST_CASE("random generators have the advertised structure") {
  std::mt19937_64 rng(31);
  const Matrix U = random_unitary(5, rng);
  CHECK(operator_norm(U.adjoint() * U - Matrix::Identity(5, 5)) < 1e-10);
  const Matrix C = random_contraction(3, 4, rng);
  CHECK(operator_norm(C) <= 0.9 + 1e-12);
  const Matrix J = random_isometry(6, 2, rng);
  CHECK(operator_norm(J.adjoint() * J - Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("unitary matrix in complex arithmetic") {
  // A phase times a rotation stays unitary and has zero defect.
  Matrix U = mat2(Complex{0.6, 0.0}, Complex{0.0, 0.8},
                  Complex{0.0, 0.8}, Complex{0.6, 0.0});
  CHECK(is_unitary(U));
  CHECK(operator_norm(defect(U)) < 1e-9);
  CHECK(std::abs(smallest_singular_value(U) - 1.0) < 1e-12);
  CHECK(numerical_rank(U) == 2);
  (void)I1;
}
