#include "extcalc/extenders.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "extcalc/errors.hpp"

using namespace extcalc;

namespace {

const Complex I(0, 1);

EvGeoSeq e(Index k) { return EvGeoSeq::unit(k); }

ModelVec project(const std::vector<ModelVec>& onb, const ModelVec& x) {
  ModelVec out;
  for (const ModelVec& b : onb) out += inner(x, b) * b;
  return out;
}

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

} // namespace

TEST_CASE("admissibility certificates") {
  // densely defined model: L_i = {0}, vacuous admissibility
  {
    DefectData dd = defect_data(ShiftModel(1));
    Matrix U(1, 1);
    U << Complex(0.3, 0.4);
    CHECK(std::isinf(check_admissible(dd, U)));
  }

  ExitModel x(ShiftModel(1), 1);
  DefectData dd = defect_data(x);

  // diag(1, -1): the lateral block is -1, distance to V_i = 1 is 2
  CHECK(check_admissible(dd, mat2(1, 0, 0, -1)) == doctest::Approx(2.0));
  // swap: certificate sqrt(2)
  CHECK(check_admissible(dd, mat2(0, 1, 1, 0)) == doctest::Approx(std::sqrt(2.0)));
  // extending the forbidden isometry is inadmissible
  CHECK_THROWS_AS(check_admissible(dd, Matrix::Identity(2, 2)), Inadmissible);
  CHECK_THROWS_AS(check_admissible(dd, 2.0 * Matrix::Identity(2, 2)),
                  NotAContraction);

  // restricted model: rank-one parameter matching V_i exactly
  RestrictedModel r(ShiftModel(1), {e(2)});
  DefectData dr = defect_data(r);
  Matrix bad = dr.basis_Lmi * dr.V_i * dr.basis_Li.adjoint();
  CHECK_THROWS_AS(check_admissible(dr, bad), Inadmissible);
}

TEST_CASE("extension acts by the parameter rule") {
  ShiftModel s(1);
  ExtensionParam p;
  p.U = Matrix::Identity(1, 1); // e_0 -> e_1
  p.kind = ExtensionParam::Kind::unitary;
  ExtensionOp ext(s, p);

  Vector phi(1);
  phi << Complex(1, 0);
  auto el = ext.eval(EvGeoSeq::zero(), phi);
  CHECK((el.f - ModelVec(e(0) - e(1))).norm() < 1e-14);
  CHECK((el.Tf - ModelVec(I * (e(0) + e(1)))).norm() < 1e-14);
  CHECK(std::abs(std::imag(inner(el.Tf, el.f))) < 1e-14);

  // phi = 0: the extension restricts to S
  std::mt19937_64 rng(81u);
  EvGeoSeq h = s.random_domain(rng);
  auto el0 = ext.eval(h, Vector::Zero(1));
  auto [f, sf] = s.apply(h);
  CHECK((el0.f - ModelVec(f)).norm() < 1e-13);
  CHECK((el0.Tf - ModelVec(sf)).norm() < 1e-13);
}

TEST_CASE("selfadjoint kind requires a unitary parameter") {
  ShiftModel s(1);
  ExtensionParam p;
  p.U = 0.5 * Matrix::Identity(1, 1);
  p.kind = ExtensionParam::Kind::unitary;
  CHECK_THROWS_AS(ExtensionOp(s, p), NotUnitary);
}

TEST_CASE("numerical range of extensions over sampled elements") {
  RestrictedModel r(ShiftModel(1), {e(2)});
  std::mt19937_64 rng(82u);
  DefectData dd = defect_data(r);

  int unitary_count = 0;
  while (unitary_count < 5) {
    Matrix U = random_unitary(2, rng);
    try {
      check_admissible(dd, U);
    } catch (const Inadmissible&) {
      continue;
    }
    ++unitary_count;
    ExtensionParam p{U, ExtensionParam::Kind::unitary, 0.0};
    ExtensionOp ext(Model(r), p);
    for (int t = 0; t < 20; ++t) {
      auto el = ext.random_element(rng);
      double scale = 1.0 + el.Tf.norm() * el.f.norm();
      CHECK(std::abs(std::imag(inner(el.Tf, el.f))) < 1e-10 * scale);
    }
  }

  for (int c = 0; c < 5; ++c) {
    Matrix U = random_contraction(2, 2, rng);
    ExtensionParam p{U, ExtensionParam::Kind::contraction, 0.0};
    ExtensionOp ext(Model(r), p);
    for (int t = 0; t < 20; ++t) {
      auto el = ext.random_element(rng);
      double scale = 1.0 + el.Tf.norm() * el.f.norm();
      CHECK(std::imag(inner(el.Tf, el.f)) > -1e-10 * scale);
    }
  }
}

TEST_CASE("domain decomposition is unique and recoverable") {
  RestrictedModel r(ShiftModel(2), {e(4), e(2) + e(6)});
  DefectData dd = defect_data(r);
  std::mt19937_64 rng(83u);
  Matrix U;
  while (true) {
    U = random_unitary(4, rng);
    try {
      check_admissible(dd, U);
      break;
    } catch (const Inadmissible&) {
    }
  }
  ExtensionParam p{U, ExtensionParam::Kind::unitary, 0.0};
  ExtensionOp ext(Model(r), p);

  for (int t = 0; t < 10; ++t) {
    EvGeoSeq h = r.random_domain(rng);
    Vector phi = random_gaussian(4, 1, rng).col(0);
    auto el = ext.eval(h, phi);
    auto dec = ext.decompose(el);
    CHECK((dec.phi - phi).norm() < 1e-9 * (1.0 + phi.norm()));
    auto [f, sf] = r.apply(h);
    CHECK((dec.f_S - ModelVec(f)).norm() < 1e-9 * (1.0 + f.norm()));
    CHECK((dec.Sf_S - ModelVec(sf)).norm() < 1e-9 * (1.0 + sf.norm()));
  }
}

TEST_CASE("resolvent and Cayley transform of extensions") {
  RestrictedModel r(ShiftModel(1), {e(2)});
  DefectData dd = defect_data(r);
  std::mt19937_64 rng(84u);
  Matrix U;
  while (true) {
    U = random_unitary(2, rng);
    try {
      check_admissible(dd, U);
      break;
    } catch (const Inadmissible&) {
    }
  }
  ExtensionParam p{U, ExtensionParam::Kind::unitary, 0.0};
  ExtensionOp ext(Model(r), p);

  for (Complex lam : {I, Complex(0, 2), Complex(1, 1)}) {
    for (int t = 0; t < 8; ++t) {
      ModelVec psi(EvGeoSeq::from_entries(
          {{-3, Complex(0.2, -0.4)}, {0, Complex(1, 0.3)}, {4, Complex(-0.7, 0.1)}}));
      psi += Complex(0.1 * t, 0) * ModelVec(e(1));
      auto res = ext.resolvent(std::conj(lam), psi);
      REQUIRE(res.has_value());
      CHECK((res->Tf - std::conj(lam) * res->f - psi).norm() < 1e-9 * (1.0 + psi.norm()));

      // selfadjoint extension => unitary Cayley transform
      auto y = ext.cayley_apply(lam, psi);
      REQUIRE(y.has_value());
      CHECK(std::abs(y->norm() - psi.norm()) < 1e-9 * (1.0 + psi.norm()));
    }
  }

  // contractive parameter: Cayley transform contractive, defect recovers P_{N_i}
  ExtensionParam p0{Matrix::Zero(2, 2), ExtensionParam::Kind::contraction, 0.0};
  ExtensionOp shtraus_i(Model(r), p0);
  auto ni = model_defect_basis(Model(r), I);
  for (int t = 0; t < 10; ++t) {
    ModelVec psi(EvGeoSeq::from_entries(
        {{-2, Complex(0.3, 0.1 * t)}, {1, Complex(0.5, -0.2)}, {3, Complex(0, 1)}}));
    auto y = shtraus_i.cayley_apply(I, psi);
    REQUIRE(y.has_value());
    // ||psi||^2 - ||Y psi||^2 = ||P_{N_i} psi||^2  (defect of the Shtraus
    // extension at i is the projection onto N_i)
    double lhs = psi.norm() * psi.norm() - y->norm() * y->norm();
    ModelVec pn = project(ni, psi);
    CHECK(lhs == doctest::Approx(pn.norm() * pn.norm()).epsilon(1e-8));
  }
}

TEST_CASE("Shtraus extension pairing and resolvent identity on L") {
  RestrictedModel r(ShiftModel(1), {e(2)});
  Model m(r);
  const Complex z(0.5, 1.5);
  ShtrausExtension sz = shtraus_extension(m, z);
  ShtrausExtension szbar(m, std::conj(z));
  std::mt19937_64 rng(85u);

  // <S_z f, g> = <f, S_zbar g> on random elements
  for (int t = 0; t < 15; ++t) {
    EvGeoSeq hf = r.random_domain(rng);
    EvGeoSeq hg = r.random_domain(rng);
    Vector cf = random_gaussian(2, 1, rng).col(0);
    Vector cg = random_gaussian(2, 1, rng).col(0);
    auto elf = sz.eval(hf, cf);
    auto elg = szbar.eval(hg, cg);
    Complex lhs = inner(elf.Tf, elg.f);
    Complex rhs = inner(elf.f, elg.Tf);
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs) + std::abs(rhs)));
  }

  // resolvent identity on the lateral space: for h in L,
  // (S_z - conj(z))^{-1} h = (1/(2i Im z)) P_{N_zbar} h
  const ModelVec h{e(2)};
  auto n_z = model_defect_basis(m, z);
  auto n_zbar = model_defect_basis(m, std::conj(z));
  const Complex c = Complex(1, 0) / Complex(0, 2 * z.imag());

  ModelVec pm = h - project(n_zbar, h); // P_{M_z} h
  auto hh = model_resolve(m, z, pm);
  REQUIRE(hh.has_value());

  // coefficients of phi_z = c P_{N_z} h in the N_z basis
  Vector coeff(static_cast<Eigen::Index>(n_z.size()));
  for (std::size_t k = 0; k < n_z.size(); ++k) {
    coeff(static_cast<Eigen::Index>(k)) = c * inner(h, n_z[k]);
  }
  auto el = sz.eval(*hh, coeff);
  ModelVec expected = c * project(n_zbar, h);
  CHECK((el.f - expected).norm() < 1e-10 * (1.0 + h.norm()));
  CHECK((el.Tf - std::conj(z) * el.f - h).norm() < 1e-10 * (1.0 + h.norm()));
}

TEST_CASE("regularity certificates for finite lateral spaces") {
  ExitModel x(ShiftModel(1), 1);
  DefectData dd = defect_data(x);
  ExtensionParam p{mat2(0, 1, 1, 0), ExtensionParam::Kind::unitary, 0.0};
  // lateral parameter of the swap is 0, so I - Y has singular value 1
  CHECK(regularity_cert(dd, p) == doctest::Approx(1.0));

  DefectData ds = defect_data(ShiftModel(2));
  ExtensionParam ps{Matrix::Identity(2, 2), ExtensionParam::Kind::unitary, 0.0};
  CHECK(std::isinf(regularity_cert(ds, ps)));
}
