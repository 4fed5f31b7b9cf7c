#include "doctest.h"

#include "extcalc/seqspace.hpp"

#include <cmath>
#include <complex>

using namespace extcalc;

namespace {

const Complex one{1.0, 0.0};

EvGeoSeq half_tail(Index start, bool one_sided = false) {
  EvGeoSeq x(one_sided);
  x.add_mode({Side::upper, start, 1, Complex{0.5, 0.0}, one});
  return x;
}

// Residual of (alpha I + beta W_s) x = rhs as a sequence.
EvGeoSeq affine_residual(Complex alpha, Complex beta, const EvGeoSeq& x,
                         const EvGeoSeq& rhs, Index stride = 1) {
  EvGeoSeq r = alpha * x;
  r += beta * x.shifted(stride);
  r -= rhs;
  return r;
}

} // namespace

TEST_CASE("inner products of unit vectors") {
  const auto e0 = EvGeoSeq::unit(0);
  const auto e5 = EvGeoSeq::unit(5);
  CHECK(std::abs(inner(e0, e0) - one) < 1e-15);
  CHECK(std::abs(inner(e0, e5)) < 1e-15);
}

TEST_CASE("inner product of a geometric tail with itself") {
  const auto x = half_tail(0);
  // sum (1/4)^k = 4/3; cross-check against partial sums.
  CHECK(std::abs(inner(x, x) - Complex{4.0 / 3.0, 0.0}) < 1e-14);
  Complex partial{0.0, 0.0};
  for (Index k = 0; k <= 200; ++k) partial += x.value_at(k) * std::conj(x.value_at(k));
  CHECK(std::abs(inner(x, x) - partial) < 1e-12);
  CHECK(std::abs(x.norm() - std::sqrt(4.0 / 3.0)) < 1e-14);
}

TEST_CASE("inner product with disjoint supports vanishes") {
  EvGeoSeq lower;
  lower.add_mode({Side::lower, -1, 1, Complex{0.5, 0.0}, one});
  const auto upper = half_tail(0);
  CHECK(std::abs(inner(upper, lower)) < 1e-15);
}

TEST_CASE("opposite tails overlapping on a window (unit product ratio)") {
  // x decays upward from 0, y decays downward from 10, both ratio 1/2:
  // the products x_k conj(y_k) are constant on the overlap 0..10.
  const auto x = half_tail(0);
  EvGeoSeq y;
  y.add_mode({Side::lower, 10, 1, Complex{0.5, 0.0}, one});
  const double expect = 11.0 / 1024.0;
  CHECK(std::abs(inner(x, y) - Complex{expect, 0.0}) < 1e-15);
  CHECK(std::abs(inner(y, x) - std::conj(inner(x, y))) < 1e-15);
}

TEST_CASE("inner is conjugate symmetric on mixed sequences") {
  EvGeoSeq x = half_tail(2);
  x.add_entry(0, Complex{1.0, -2.0});
  x.add_mode({Side::lower, -3, 2, Complex{0.3, 0.4}, Complex{0.0, 1.0}});
  EvGeoSeq y = half_tail(-1);
  y.add_entry(2, Complex{0.5, 0.5});
  y.add_mode({Side::lower, 5, 2, Complex{-0.2, 0.1}, Complex{2.0, 0.0}});
  const Complex a = inner(x, y);
  const Complex b = inner(y, x);
  CHECK(std::abs(a - std::conj(b)) < 1e-12);
  CHECK(inner(x, x).real() > 0.0);
  CHECK(std::abs(inner(x, x).imag()) < 1e-13);
}

TEST_CASE("explicit entries override and extend tails consistently") {
  EvGeoSeq x = half_tail(0);
  x.set_entry(2, Complex{7.0, 0.0});
  CHECK(std::abs(x.value_at(0) - one) < 1e-15);
  CHECK(std::abs(x.value_at(1) - Complex{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(x.value_at(2) - Complex{7.0, 0.0}) < 1e-15);
  CHECK(std::abs(x.value_at(3) - Complex{0.125, 0.0}) < 1e-15);

  EvGeoSeq y = half_tail(0);
  y.add_entry(2, Complex{7.0, 0.0});
  CHECK(std::abs(y.value_at(2) - Complex{7.25, 0.0}) < 1e-15);
}

TEST_CASE("shift is an exact isometry") {
  const auto e0 = EvGeoSeq::unit(0);
  CHECK(std::abs(e0.shifted(1).value_at(1) - one) < 1e-15);
  EvGeoSeq x = half_tail(0);
  x.add_entry(-4, Complex{2.0, 1.0});
  const auto y = x.shifted(3).shifted(-3);
  CHECK((y - x).is_zero(1e-15));
  EvGeoSeq z = half_tail(5);
  CHECK(std::abs(inner(x.shifted(1), z.shifted(1)) - inner(x, z)) < 1e-13);
}

TEST_CASE("one-sided adjoint shift truncates") {
  EvGeoSeq x(true);
  x.add_entry(0, one);
  x.add_mode({Side::upper, 1, 1, Complex{0.5, 0.0}, one});
  const auto y = x.backshift_truncate(1);
  CHECK(std::abs(y.value_at(0) - one) < 1e-15);
  CHECK(std::abs(y.value_at(1) - Complex{0.5, 0.0}) < 1e-15);
}

TEST_CASE("affine shift solve: diagonal case") {
  const auto rhs = half_tail(0);
  const auto r = solve_affine_shift(Complex{2.0, 0.0}, Complex{0.0, 0.0}, rhs);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  CHECK(affine_residual(Complex{2.0, 0.0}, {0.0, 0.0}, *r.solution, rhs)
            .is_zero(1e-14));
}

TEST_CASE("affine shift solve: Neumann tail") {
  const auto e0 = EvGeoSeq::unit(0);
  const auto r = solve_affine_shift(one, Complex{-0.5, 0.0}, e0);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  const auto& x = *r.solution;
  for (Index k = 0; k <= 6; ++k)
    CHECK(std::abs(x.value_at(k) - Complex{std::pow(0.5, double(k)), 0.0}) <
          1e-14);
  CHECK(std::abs(x.value_at(-1)) < 1e-15);
  CHECK(affine_residual(one, Complex{-0.5, 0.0}, x, e0).is_zero(1e-13));
}

TEST_CASE("affine shift solve: strided Neumann tail") {
  const auto e0 = EvGeoSeq::unit(0);
  const auto r = solve_affine_shift(one, Complex{-0.5, 0.0}, e0, 2);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  CHECK(std::abs(r.solution->value_at(2) - Complex{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(r.solution->value_at(1)) < 1e-15);
  CHECK(affine_residual(one, Complex{-0.5, 0.0}, *r.solution, e0, 2)
            .is_zero(1e-13));
}

TEST_CASE("affine shift solve: expanding symbol goes downward") {
  const auto e0 = EvGeoSeq::unit(0);
  const auto r = solve_affine_shift(one, Complex{-2.0, 0.0}, e0);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  const auto& x = *r.solution;
  CHECK(std::abs(x.value_at(0)) < 1e-15);           // support below the source
  CHECK(std::abs(x.value_at(-1) + Complex{0.5, 0.0}) < 1e-15);
  CHECK(affine_residual(one, Complex{-2.0, 0.0}, x, e0).is_zero(1e-13));
}

TEST_CASE("affine shift solve with geometric right-hand sides") {
  // rhs carries its own tails; the solution must cancel symbolically.
  EvGeoSeq rhs = half_tail(1);
  rhs.add_entry(-2, Complex{1.0, 1.0});
  rhs.add_mode({Side::lower, -5, 1, Complex{0.25, 0.0}, Complex{0.0, 2.0}});
  for (const Complex beta : {Complex{-0.4, 0.1}, Complex{2.5, -1.0}}) {
    const auto r = solve_affine_shift(one, beta, rhs);
    REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
    CHECK(affine_residual(one, beta, *r.solution, rhs).is_zero(1e-12));
  }
}

TEST_CASE("one-sided unit-symbol solve certifies non-membership") {
  const auto e0 = EvGeoSeq::unit(0, true);
  const auto r = solve_affine_shift(one, Complex{-1.0, 0.0}, e0);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::non_member);
  CHECK(std::abs(r.cert.witness_ratio - one) < 1e-14);
}

TEST_CASE("one-sided growing-symbol solves exactly when tails cancel") {
  // (I - 2 W) x = e0 - 2 e1 has the one-sided solution e0.
  EvGeoSeq rhs(true);
  rhs.add_entry(0, one);
  rhs.add_entry(1, Complex{-2.0, 0.0});
  const auto r = solve_affine_shift(one, Complex{-2.0, 0.0}, rhs);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  CHECK(r.solution->one_sided());
  CHECK((*r.solution - EvGeoSeq::unit(0, true)).is_zero(1e-12));

  // Without the cancellation the forced tail has ratio 2.
  const auto bad = solve_affine_shift(one, Complex{-2.0, 0.0},
                                      EvGeoSeq::unit(0, true));
  REQUIRE(bad.cert.kind == SeqCertificate::Kind::non_member);
  CHECK(std::abs(bad.cert.witness_ratio - Complex{2.0, 0.0}) < 1e-14);
}

TEST_CASE("bilateral unit-circle symbol: exact solvable set") {
  // (I - W) x = e0 - e1 is solved by e0; e0 alone is not in the range.
  EvGeoSeq rhs;
  rhs.add_entry(0, one);
  rhs.add_entry(1, -one);
  const auto r = solve_affine_shift(one, Complex{-1.0, 0.0}, rhs);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  CHECK((*r.solution - EvGeoSeq::unit(0)).is_zero(1e-12));

  const auto bad = solve_affine_shift(one, Complex{-1.0, 0.0}, EvGeoSeq::unit(0));
  REQUIRE(bad.cert.kind == SeqCertificate::Kind::non_member);
  CHECK(std::abs(std::abs(bad.cert.witness_ratio) - 1.0) < 1e-14);
}

TEST_CASE("degenerate affine symbol is rejected") {
  CHECK_THROWS_AS(
      solve_affine_shift(Complex{0.0, 0.0}, Complex{0.0, 0.0}, EvGeoSeq::unit(0)),
      DegenerateSymbol);
}

TEST_CASE("backshift solve on the half line") {
  // (I - W+^H) x = e0 is solved by e0 itself.
  const auto e0 = EvGeoSeq::unit(0, true);
  const auto r = solve_affine_backshift(one, Complex{-1.0, 0.0}, e0);
  REQUIRE(r.cert.kind == SeqCertificate::Kind::member);
  CHECK((*r.solution - e0).is_zero(1e-13));

  // Geometric rhs: (I - W+^H) applied to 2 * (1/2)-tail gives the tail back.
  const auto tail = half_tail(0, true);
  const auto r2 = solve_affine_backshift(one, Complex{-1.0, 0.0}, tail);
  REQUIRE(r2.cert.kind == SeqCertificate::Kind::member);
  EvGeoSeq resid = one * (*r2.solution);
  resid -= r2.solution->backshift_truncate(1);
  resid -= tail;
  CHECK(resid.is_zero(1e-12));
  CHECK(std::abs(r2.solution->value_at(0) - Complex{2.0, 0.0}) < 1e-13);
}

TEST_CASE("kernel certificates for shift symbols") {
  const auto k1 = kernel_certificate_shift(one, Complex{-1.0, 0.0});
  CHECK(k1.kind == SeqCertificate::Kind::trivial_kernel);

  const auto k2 = kernel_certificate_backshift(one, Complex{-1.0, 0.0});
  CHECK(k2.kind == SeqCertificate::Kind::trivial_kernel);
  CHECK(std::abs(k2.witness_ratio - one) < 1e-15);

  // alpha x_k + beta x_{k+1} with |alpha| < |beta| has a geometric kernel.
  const auto k3 = kernel_certificate_backshift(Complex{0.5, 0.0}, -one);
  CHECK(k3.kind == SeqCertificate::Kind::nontrivial_kernel);
  CHECK(std::abs(k3.witness_ratio - Complex{0.5, 0.0}) < 1e-15);
}

TEST_CASE("three-term recurrence with decaying characteristic roots") {
  // roots 1/2 and 2: (t - 1/2)(t - 2) = t^2 - 2.5 t + 1.
  const Complex cm{1.0, 0.0}, c0{-2.5, 0.0}, cp{1.0, 0.0};
  const auto rhs = EvGeoSeq::unit(0);
  const auto x = solve_second_order(cm, c0, cp, rhs, {});
  CHECK(std::abs(x.value_at(0) - Complex{-2.0 / 3.0, 0.0}) < 1e-12);
  CHECK(std::abs(x.value_at(1) - Complex{-1.0 / 3.0, 0.0}) < 1e-12);
  CHECK(std::abs(x.value_at(-1) - Complex{-1.0 / 3.0, 0.0}) < 1e-12);
  CHECK(second_order_residual(cm, c0, cp, x, rhs).is_zero(1e-11));
}

TEST_CASE("three-term recurrence with a hole constraint") {
  const Complex cm{1.0, 0.0}, c0{-2.5, 0.0}, cp{1.0, 0.0};
  const auto rhs = EvGeoSeq::unit(1);
  const auto x = solve_second_order(cm, c0, cp, rhs, {0});
  CHECK(std::abs(x.value_at(0)) < 1e-12);
  // Residual away from the hole: compare componentwise on a window.
  const auto resid = second_order_residual(cm, c0, cp, x, rhs);
  for (Index k = -8; k <= 8; ++k) {
    if (k == 0) continue;
    CHECK(std::abs(resid.value_at(k)) < 1e-11);
  }
}

TEST_CASE("three-term recurrence propagates geometric right-hand sides") {
  const Complex cm{1.0, 0.0}, c0{-2.5, 0.0}, cp{1.0, 0.0};
  EvGeoSeq rhs;
  rhs.add_mode({Side::upper, 3, 1, Complex{0.25, 0.0}, one});
  rhs.add_entry(-1, Complex{0.0, 1.0});
  const auto x = solve_second_order(cm, c0, cp, rhs, {1});
  CHECK(std::abs(x.value_at(1)) < 1e-12);
  const auto resid = second_order_residual(cm, c0, cp, x, rhs);
  for (Index k = -10; k <= 14; ++k) {
    if (k == 1) continue;
    CHECK(std::abs(resid.value_at(k)) < 1e-11);
  }
}

TEST_CASE("unit-circle characteristic roots are rejected") {
  CHECK_THROWS_AS(
      solve_second_order(one, Complex{-2.0, 0.0}, one, EvGeoSeq::unit(0), {}),
      CriticalRoot);
  CHECK_THROWS_AS(
      solve_second_order(Complex{-1.0, 0.0}, Complex{0.0, 0.0}, one,
                         EvGeoSeq::unit(0), {}),
      CriticalRoot);
}

TEST_CASE("strided recurrence keeps classes independent") {
  const Complex cm{1.0, 0.0}, c0{-2.5, 0.0}, cp{1.0, 0.0};
  const auto rhs = EvGeoSeq::unit(0);
  const auto x = solve_second_order(cm, c0, cp, rhs, {}, 2);
  CHECK(std::abs(x.value_at(1)) < 1e-13);  // odd class untouched
  CHECK(second_order_residual(cm, c0, cp, x, rhs, 2).is_zero(1e-11));
}
