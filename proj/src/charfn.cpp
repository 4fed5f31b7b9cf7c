#include "extcalc/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "extcalc/errors.hpp"

namespace extcalc {

namespace {

Complex xi_of(Complex lambda, Complex z) {
  return (z - lambda) / (z - std::conj(lambda));
}

void require_upper(Complex lambda, Complex z) {
  if (lambda.imag() <= 0.0 || z.imag() <= 0.0) {
    throw PreconditionViolated(
        "characteristic function: lambda and z must lie in the open upper half-plane");
  }
}

Vector coords_in(const std::vector<ModelVec>& basis, const ModelVec& x) {
  Vector c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    c(static_cast<Eigen::Index>(j)) = inner(x, basis[j]);
  }
  return c;
}

ModelVec combine(const std::vector<ModelVec>& basis, const Vector& c) {
  ModelVec out;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    out += c(static_cast<Eigen::Index>(j)) * basis[j];
  }
  return out;
}

// G(j, k) = <cols[k], rows[j]>: the coordinates of P_{span rows} cols[k].
Matrix gram(const std::vector<ModelVec>& rows, const std::vector<ModelVec>& cols) {
  Matrix g(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          inner(cols[k], rows[j]);
    }
  }
  return g;
}

struct GramInverse {
  Matrix inv;
  double condition = 1.0;
  bool flagged = false;
};

// Inverse of a deficiency Gram system with the well-posedness policy:
// rank loss is an error, bad conditioning only a flag on the sample.
GramInverse invert_gram(const Matrix& A, const TolerancePolicy& tol,
                        const char* what) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("deficiency Gram system is not square");
  }
  GramInverse out;
  if (A.size() == 0) {
    out.inv = A;
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= tol.rank_tol) throw DegenerateProjection(what);
  out.condition = sv(0) / smin;
  out.flagged = out.condition > 1.0 / tol.rank_tol;
  out.inv = svd.matrixV() * sv.cwiseInverse().asDiagonal() *
            svd.matrixU().adjoint();
  return out;
}

std::vector<ModelVec> lateral_model_basis(const Model& model) {
  std::vector<ModelVec> out;
  if (const auto* rm = std::get_if<RestrictedModel>(&model)) {
    for (const EvGeoSeq& u : rm->L_basis()) out.emplace_back(u);
  } else if (const auto* xm = std::get_if<ExitModel>(&model)) {
    for (Index j = 0; j < xm->m1(); ++j) {
      Vector e = Vector::Zero(xm->m1());
      e(j) = 1.0;
      out.emplace_back(EvGeoSeq::zero(), e);
    }
  }
  return out;
}

// Partial Cayley isometry between the range spaces of S - from and
// S - to ({from, to} conjugate pairs), extended by zero on the
// orthogonal complement N_{conj(from)}.
ModelVec apply_cayley_partial(const Model& model, Complex from, Complex to,
                              const ModelVec& v) {
  const std::vector<ModelVec> ker = model_defect_basis(model, std::conj(from));
  const ModelVec m = v - combine(ker, coords_in(ker, v));
  const auto h = model_resolve(model, from, m);
  if (!h) {
    throw RangeCompatibility(
        "cayley transform: projected vector fell outside the range");
  }
  return model_range_vector(model, to, *h);
}

} // namespace

CharFnSample charfn_via_Nz(const Model& model, Complex lambda, Complex z,
                           const TolerancePolicy& tol) {
  require_upper(lambda, z);
  const std::vector<ModelVec> bl = model_defect_basis(model, lambda);
  const std::vector<ModelVec> blb = model_defect_basis(model, std::conj(lambda));
  const std::vector<ModelVec> bz = model_defect_basis(model, z);

  const Matrix A = gram(bl, bz);
  const Matrix B = gram(blb, bz);
  const GramInverse gi = invert_gram(
      A, tol, "projection of the z-deficiency space onto N_lambda lost rank");

  CharFnSample s;
  s.lambda = lambda;
  s.z = z;
  s.route = CharFnSample::Route::via_Nz;
  const Complex xi = xi_of(lambda, z);
  s.matrix = xi * B * gi.inv;
  s.norm = operator_norm(s.matrix);
  s.bound_slack = std::abs(xi) - s.norm;
  s.condition = gi.condition;
  s.flagged = gi.flagged;
  return s;
}

CharFnSample charfn_via_cayley(const Model& model, Complex lambda, Complex z,
                               const TolerancePolicy& tol) {
  require_upper(lambda, z);
  if (z == lambda) {
    // The Moebius coordinate vanishes identically here, and the resolvent
    // realization would sit exactly on its own deficiency point.
    const Eigen::Index n =
        static_cast<Eigen::Index>(model_defect_basis(model, lambda).size());
    CharFnSample s;
    s.lambda = lambda;
    s.z = z;
    s.route = CharFnSample::Route::via_cayley;
    s.matrix = Matrix::Zero(n, n);
    return s;
  }
  const Complex lb = std::conj(lambda);
  const Complex xi = xi_of(lambda, z);

  const std::vector<ModelVec> bl = model_defect_basis(model, lambda);
  const std::vector<ModelVec> blb = model_defect_basis(model, lb);
  const std::vector<ModelVec> bzb = model_defect_basis(model, std::conj(z));
  const Eigen::Index n = static_cast<Eigen::Index>(bl.size());

  // Coordinates of P_{N_zbar} on the N_lambdabar basis: the skew system
  // that peels the defect part off the resolvent right-hand side.
  const Matrix A2 = gram(bzb, blb);
  const GramInverse gi = invert_gram(
      A2, tol,
      "projection of the lambdabar-deficiency space onto N_zbar lost rank");

  Matrix C(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const ModelVec& phi = bl[static_cast<std::size_t>(k)];
    const Vector r = coords_in(bzb, phi);
    const Vector c = gi.inv * r / (lb - z);
    const ModelVec psi = combine(blb, c);
    const ModelVec g = phi - (lb - z) * psi;
    const auto h = model_resolve(model, z, g);
    if (!h) {
      throw RangeCompatibility(
          "cayley route: reduced right-hand side fell outside ran(S - z)");
    }
    // x = (I - xi Y_lambda^*)^{-1} phi via the resolvent identity
    // (1-xi)^{-1} (T - lambda)(T - z)^{-1} phi for the lambdabar-extension T.
    const ModelVec x = (1.0 / (1.0 - xi)) *
                       (model_range_vector(model, lambda, *h) + (lb - lambda) * psi);
    C.col(k) = xi * coords_in(blb, x);
  }

  CharFnSample s;
  s.lambda = lambda;
  s.z = z;
  s.route = CharFnSample::Route::via_cayley;
  s.matrix = C;
  s.norm = operator_norm(C);
  s.bound_slack = std::abs(xi) - s.norm;
  s.condition = gi.condition;
  s.flagged = gi.flagged;
  return s;
}

std::vector<Complex> default_grid() {
  std::vector<Complex> zs;
  for (double x : {-1.0, 0.0, 1.0}) {
    for (double y : {0.5, 1.0, 2.0, 5.0}) {
      zs.emplace_back(x, y);
    }
  }
  for (double t = 10.0; t < 1.5e6; t *= 10.0) {
    zs.emplace_back(0.0, t);
  }
  return zs;
}

CharFnGrid charfn_grid(const Model& model, Complex lambda,
                       const std::vector<Complex>& zs,
                       const TolerancePolicy& tol) {
  CharFnGrid grid;
  grid.lambda = lambda;
  grid.min_bound_slack = std::numeric_limits<double>::infinity();
  for (Complex z : zs) {
    CharFnGridPoint pt;
    pt.nz = charfn_via_Nz(model, lambda, z, tol);
    pt.cayley = charfn_via_cayley(model, lambda, z, tol);
    pt.discrepancy = operator_norm(pt.nz.matrix - pt.cayley.matrix);
    grid.max_discrepancy = std::max(grid.max_discrepancy, pt.discrepancy);
    grid.min_bound_slack = std::min(
        grid.min_bound_slack, std::min(pt.nz.bound_slack, pt.cayley.bound_slack));
    grid.samples.push_back(std::move(pt));
  }
  if (grid.samples.empty()) grid.min_bound_slack = 0.0;
  return grid;
}

DeficiencyFrame deficiency_frame(const Model& model, Complex mu,
                                 const TolerancePolicy& tol) {
  DeficiencyFrame f;
  f.basis = model_defect_basis(model, mu);
  const Eigen::Index n = static_cast<Eigen::Index>(f.basis.size());
  const std::vector<ModelVec> L = lateral_model_basis(model);
  const Eigen::Index p = static_cast<Eigen::Index>(L.size());
  Matrix raw(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    raw.col(j) = coords_in(f.basis, L[static_cast<std::size_t>(j)]);
  }
  if (p == 0) {
    f.lateral = Matrix::Zero(n, 0);
    f.reduced = Matrix::Identity(n, n);
    return f;
  }
  // Unpivoted thin QR keeps the column pairing with the lateral basis,
  // which the isometry construction below relies on.
  Eigen::HouseholderQR<Matrix> qr(raw);
  const Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::abs(R(j, j)) <= tol.rank_tol) {
      throw DegenerateProjection(
          "lateral subspace collapses under the deficiency projection");
    }
  }
  f.lateral = qr.householderQ() * Matrix::Identity(n, p);
  f.reduced = Subspace::from_orthonormal(f.lateral).complement(tol).basis();
  return f;
}

Matrix lateral_isometry(const Model& model, Complex mu,
                        const TolerancePolicy& tol) {
  const std::vector<ModelVec> L = lateral_model_basis(model);
  const Eigen::Index p = static_cast<Eigen::Index>(L.size());
  const DeficiencyFrame fm = deficiency_frame(model, mu, tol);
  const DeficiencyFrame fb = deficiency_frame(model, std::conj(mu), tol);
  if (p == 0) return Matrix::Zero(0, 0);

  Matrix raw_m(static_cast<Eigen::Index>(fm.basis.size()), p);
  Matrix raw_b(static_cast<Eigen::Index>(fb.basis.size()), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    raw_m.col(j) = coords_in(fm.basis, L[static_cast<std::size_t>(j)]);
    raw_b.col(j) = coords_in(fb.basis, L[static_cast<std::size_t>(j)]);
  }
  // Columns of fm.lateral are raw_m * R^{-1}; the matching images under
  // the lateral map P_{N_mu} h -> P_{N_mubar} h are raw_b * R^{-1}.
  Eigen::HouseholderQR<Matrix> qr(raw_m);
  const Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Matrix W = R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(raw_b);
  const Matrix V = fb.lateral.adjoint() * W;
  if (operator_norm(fb.lateral * V - W) > 1e3 * tol.eq_tol) {
    throw DegenerateProjection(
        "lateral image left the lateral subspace at the conjugate point");
  }
  return V;
}

BoundaryTable boundary_limit_check(const RestrictedModel& model, Complex lambda,
                                   const std::vector<double>& t_list,
                                   const TolerancePolicy& tol) {
  const Model m{model};
  BoundaryTable tab;
  tab.t = t_list;
  if (model.p() == 0) {
    tab.deviation.assign(t_list.size(), 0.0);
    tab.nonincreasing = true;
    return tab;
  }
  const DeficiencyFrame fm = deficiency_frame(m, lambda, tol);
  const DeficiencyFrame fb = deficiency_frame(m, std::conj(lambda), tol);
  const Matrix V = lateral_isometry(m, lambda, tol);
  for (double t : t_list) {
    const CharFnSample s = charfn_via_Nz(m, lambda, Complex(0.0, t), tol);
    tab.deviation.push_back(
        operator_norm(s.matrix * fm.lateral - fb.lateral * V));
  }
  tab.nonincreasing = true;
  for (std::size_t k = 1; k < tab.deviation.size(); ++k) {
    if (tab.deviation[k] > tab.deviation[k - 1] * (1.0 + 1e-9) + 1e-14) {
      tab.nonincreasing = false;
    }
  }
  return tab;
}

SchurRelationReport schur_relation_check(const RestrictedModel& model,
                                         Complex lambda, Complex z,
                                         const TolerancePolicy& tol) {
  const Model m{model};
  const CharFnSample cs = charfn_via_Nz(m, lambda, z, tol);
  const DeficiencyFrame fl = deficiency_frame(m, lambda, tol);
  const DeficiencyFrame fb = deficiency_frame(m, std::conj(lambda), tol);

  SchurRelationReport rep;
  rep.A11 = fb.lateral.adjoint() * cs.matrix * fl.lateral;
  rep.A12 = fb.lateral.adjoint() * cs.matrix * fl.reduced;
  rep.A21 = fb.reduced.adjoint() * cs.matrix * fl.lateral;
  rep.A22 = fb.reduced.adjoint() * cs.matrix * fl.reduced;
  rep.V = lateral_isometry(m, lambda, tol);

  const Eigen::Index q = rep.A11.cols();
  Matrix pivot_inv;
  if (q > 0) {
    const Matrix pivot = rep.A11 - rep.V;
    if (smallest_singular_value(pivot) <= tol.rank_tol) {
      throw SingularPivot(
          "lateral block of the characteristic function meets the boundary isometry");
    }
    pivot_inv = pivot.partialPivLu().solve(Matrix::Identity(q, q));
    rep.schur = rep.A22 - rep.A21 * pivot_inv * rep.A12;
  } else {
    rep.schur = rep.A22;
  }

  // Independent evaluation of the compressed operator's characteristic
  // function: same projection-ratio formula, run entirely inside the
  // domain closure on the reduced deficiency frames.
  const DeficiencyFrame fz = deficiency_frame(m, z, tol);
  const auto reduced_vectors = [](const DeficiencyFrame& f) {
    std::vector<ModelVec> out;
    for (Eigen::Index j = 0; j < f.reduced.cols(); ++j) {
      out.push_back(combine(f.basis, f.reduced.col(j)));
    }
    return out;
  };
  const std::vector<ModelVec> pl = reduced_vectors(fl);
  const std::vector<ModelVec> pb = reduced_vectors(fb);
  const std::vector<ModelVec> pz = reduced_vectors(fz);
  const Matrix Ap = gram(pl, pz);
  const Matrix Bp = gram(pb, pz);
  const GramInverse gi = invert_gram(
      Ap, tol, "reduced z-deficiency space degenerates inside the domain closure");
  rep.compressed = xi_of(lambda, z) * Bp * gi.inv;
  rep.residual = operator_norm(rep.schur - rep.compressed);

  // Triangular factorization of the shifted block matrix around the
  // independently computed compressed function.
  const Eigen::Index np = rep.A22.rows();
  const Eigen::Index npc = rep.A22.cols();
  Matrix shifted(q + np, q + npc);
  Matrix prod(q + np, q + npc);
  if (q > 0) {
    shifted.topLeftCorner(q, q) = rep.A11 - rep.V;
    shifted.topRightCorner(q, npc) = rep.A12;
    shifted.bottomLeftCorner(np, q) = rep.A21;
    shifted.bottomRightCorner(np, npc) = rep.A22;
    Matrix lower = Matrix::Identity(q + np, q + np);
    lower.bottomLeftCorner(np, q) = rep.A21 * pivot_inv;
    Matrix upper = Matrix::Identity(q + npc, q + npc);
    upper.topRightCorner(q, npc) = pivot_inv * rep.A12;
    Matrix mid = Matrix::Zero(q + np, q + npc);
    mid.topLeftCorner(q, q) = rep.A11 - rep.V;
    mid.bottomRightCorner(np, npc) = rep.compressed;
    prod = lower * mid * upper;
  } else {
    shifted = rep.A22;
    prod = rep.compressed;
  }
  rep.factor_residual = operator_norm(shifted - prod);
  return rep;
}

double rescaling_residual(const Model& model, Complex lambda, Complex z,
                          const TolerancePolicy& tol) {
  const Matrix lhs = charfn_via_Nz(model, lambda, z, tol).matrix;

  // Resolvent route of the rescaled operator (S - a)/b at base point i
  // and sample point w = (z - a)/b.  Its deficiency spaces coincide with
  // the base model's at the pulled-back points, and its resolvents are
  // scalar multiples of the base resolvents.
  const double a = lambda.real();
  const double b = lambda.imag();
  const Complex iu(0.0, 1.0);
  const Complex w = (z - a) / b;
  const Complex xi2 = (w - iu) / (w + iu);

  const std::vector<ModelVec> bl = model_defect_basis(model, lambda);
  const std::vector<ModelVec> blb = model_defect_basis(model, std::conj(lambda));
  const std::vector<ModelVec> bzb = model_defect_basis(model, std::conj(z));
  const Eigen::Index n = static_cast<Eigen::Index>(bl.size());

  const Matrix A2 = gram(bzb, blb);
  const GramInverse gi = invert_gram(
      A2, tol,
      "projection of the lambdabar-deficiency space onto N_zbar lost rank");

  Matrix rhs(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const ModelVec& phi = bl[static_cast<std::size_t>(k)];
    const Vector r = coords_in(bzb, phi);
    const Vector c = gi.inv * r / (-iu - w);
    const ModelVec psi = combine(blb, c);
    const ModelVec g = phi - (-iu - w) * psi;
    const auto h = model_resolve(model, z, Complex(b) * g);
    if (!h) {
      throw RangeCompatibility(
          "rescaled cayley route: reduced right-hand side fell outside the range");
    }
    const ModelVec x =
        (1.0 / (1.0 - xi2)) *
        ((1.0 / b) * model_range_vector(model, lambda, *h) + (-2.0 * iu) * psi);
    rhs.col(k) = xi2 * coords_in(blb, x);
  }
  return operator_norm(lhs - rhs);
}

double cayley_defect_residual(const Model& model, Complex z, const ModelVec& h,
                              const TolerancePolicy&) {
  const ModelVec yh = apply_cayley_partial(model, std::conj(z), z, h);
  const ModelVec ysyh = apply_cayley_partial(model, z, std::conj(z), yh);
  const std::vector<ModelVec> bz = model_defect_basis(model, z);
  const ModelVec lhs = h - ysyh;
  const ModelVec rhs = combine(bz, coords_in(bz, h));
  return (lhs - rhs).norm();
}

double lateral_cayley_residual(const Model& model, Complex z, const ModelVec& h,
                               const TolerancePolicy&) {
  const ModelVec yh = apply_cayley_partial(model, std::conj(z), z, h);
  const std::vector<ModelVec> bzb = model_defect_basis(model, std::conj(z));
  const ModelVec rhs = combine(bzb, coords_in(bzb, h));
  return (h - yh - rhs).norm();
}

} // namespace extcalc
