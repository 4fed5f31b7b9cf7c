#include "extcalc/structured.hpp"

#include <random>

#include "doctest.h"
#include "extcalc/errors.hpp"

using namespace extcalc;

namespace {

bool has_kind(const std::vector<SeqCertificate>& certs,
              SeqCertificate::Kind kind) {
  for (const auto& c : certs)
    if (c.kind == kind) return true;
  return false;
}

} // namespace

TEST_CASE("forward shift block: exact facts") {
  StructuredY y = forward_shift_y(2);
  CHECK(y.kind == StructuredY::Kind::forward_shift);
  CHECK(y.facts.ker_id_minus_y_trivial);
  CHECK(y.facts.omega_y_trivial);
  CHECK(y.facts.omega_ystar_trivial);
  CHECK(y.facts.dim_dy == 0);
  CHECK(y.facts.dim_dystar == 2);
  CHECK(has_kind(y.facts.certificates, SeqCertificate::Kind::trivial_kernel));
  // the range gap at e0 is witnessed by a constant (ratio-one) tail
  bool gap_witnessed = false;
  for (const auto& c : y.facts.certificates)
    if (c.kind == SeqCertificate::Kind::non_member &&
        std::abs(c.witness_ratio - Complex(1, 0)) < 1e-15)
      gap_witnessed = true;
  CHECK(gap_witnessed);
}

TEST_CASE("backward shift block: exact facts") {
  StructuredY y = backward_shift_y(3);
  CHECK(y.facts.ker_id_minus_y_trivial);
  CHECK(y.facts.omega_y_trivial);
  CHECK(y.facts.omega_ystar_trivial);
  CHECK(y.facts.dim_dy == 3);
  CHECK(y.facts.dim_dystar == 0);
}

TEST_CASE("finite unitary blocks reject fixed vectors and non-unitaries") {
  CHECK_THROWS_AS(finite_unitary_y(Matrix::Identity(2, 2)), DegenerateU);
  CHECK_THROWS_AS(finite_unitary_y(0.5 * Matrix::Identity(2, 2)), NotUnitary);
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  CHECK_THROWS_AS(finite_unitary_y(w), DegenerateU);  // eigenvalue 1

  StructuredY ok = finite_unitary_y(-Matrix::Identity(2, 2));
  CHECK(ok.facts.ker_id_minus_y_trivial);
  CHECK(ok.facts.omega_y_trivial);
  CHECK(ok.facts.dim_dy == 0);
  CHECK(ok.facts.dim_dystar == 0);
}

TEST_CASE("catalog hits requested defect dimensions") {
  for (Index a : {0, 1, 2}) {
    for (Index b : {0, 1, 3}) {
      StructuredY y = catalog_y(a, b);
      CHECK(y.facts.dim_dy == a);
      CHECK(y.facts.dim_dystar == b);
      CHECK(y.facts.ker_id_minus_y_trivial);
      CHECK(y.facts.omega_y_trivial);
      CHECK(y.facts.omega_ystar_trivial);
    }
  }
  CHECK_THROWS_AS(catalog_y(-1, 0), DimensionMismatch);
}

TEST_CASE("membership in ran(I - Y) is member iff zero") {
  StructuredY y = catalog_y(2, 3);

  Vector zero = Vector::Zero(3);
  CHECK(membership_in_ran_id_minus_y(y, zero).kind ==
        SeqCertificate::Kind::member);

  Vector c(3);
  c << 0.0, Complex(0, 0.25), 0.0;
  auto cert = membership_in_ran_id_minus_y(y, c);
  CHECK(cert.kind == SeqCertificate::Kind::non_member);
  CHECK(std::abs(cert.witness_ratio - Complex(1, 0)) < 1e-15);

  Vector cs(2);
  cs << 1e-14, 0.0;
  CHECK(membership_in_ran_id_minus_ystar(y, cs).kind ==
        SeqCertificate::Kind::member);
  cs(1) = 0.5;
  CHECK(membership_in_ran_id_minus_ystar(y, cs).kind ==
        SeqCertificate::Kind::non_member);

  CHECK_THROWS_AS(membership_in_ran_id_minus_y(y, cs), DimensionMismatch);
}

TEST_CASE("structured parameter validation") {
  std::mt19937_64 rng(421u);
  StructuredParam p;
  p.y = catalog_y(2, 2);
  p.np_plus = 2;
  p.np_minus = 2;
  p.M = random_isometry(2, 2, rng).adjoint();  // co-isometry, D_M = 0
  p.G = random_isometry(2, 2, rng);
  p.X = Matrix::Zero(2, 2);
  CHECK_NOTHROW(validate(p));

  StructuredParam bad = p;
  bad.M = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(validate(bad), DimensionMismatch);

  bad = p;
  bad.M = 2.0 * p.M;
  CHECK_THROWS_AS(validate(bad), NotAContraction);

  // X must live on the defect spaces: with M unitary (zero defect) a
  // nonzero X is incompatible
  bad = p;
  bad.X = 0.5 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(validate(bad), RangeCompatibility);
}
