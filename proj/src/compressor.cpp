#include "extcalc/compressor.hpp"

#include <algorithm>
#include <cmath>

namespace extcalc {

namespace {

// Properties of the compressed operator read off its parameter: the
// domain codimensions give the deficiency indices, isometry of the
// action detects symmetry, full domain detects maximality.
std::set<Classification> classify(const Subspace& dom, const Matrix& U0,
                                  const Subspace& dom_star, Index np, Index nm,
                                  const TolerancePolicy& tol) {
  std::set<Classification> out;
  // The action is always a contraction here, so the imaginary part of
  // the quadratic form is nonnegative on the whole domain.
  out.insert(Classification::dissipative);
  const Index d = dom.dim();
  if (d == 0) out.insert(Classification::equals_S0);
  bool isometric = true;
  if (d > 0) {
    const Matrix gram = U0.adjoint() * U0;
    isometric =
        operator_norm(gram - Matrix::Identity(d, d)) <= 10 * tol.eq_tol;
  }
  if (isometric) out.insert(Classification::symmetric);
  const bool dom_full = (d == np);
  const bool dom_star_full = (dom_star.dim() == nm);
  if (dom_full) out.insert(Classification::maximal_dissipative);
  if (dom_full && dom_star_full)
    out.insert(Classification::dual_pair_adjoint);
  if (dom_full && isometric && numerical_rank(U0, tol) == nm)
    out.insert(Classification::selfadjoint);
  return out;
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::equals_S0: return "equals_S0";
    case Classification::symmetric: return "symmetric";
    case Classification::selfadjoint: return "selfadjoint";
    case Classification::dissipative: return "dissipative";
    case Classification::maximal_dissipative: return "maximal_dissipative";
    case Classification::dual_pair_adjoint: return "dual_pair_adjoint";
  }
  return "unknown";
}

AdaptedBlocks adapted_blocks(const DefectData& dd, const Matrix& U,
                             const TolerancePolicy& tol) {
  if (U.rows() != dd.n_minus || U.cols() != dd.n_plus)
    throw DimensionMismatch("adapted_blocks: U must map the N_i coordinates "
                            "to the N_{-i} coordinates");
  AdaptedBlocks ab;
  ab.U11 = dd.basis_Lmi.adjoint() * U * dd.basis_Li;
  ab.U12 = dd.basis_Lmi.adjoint() * U * dd.basis_Nip;
  ab.U21 = dd.basis_Nmip.adjoint() * U * dd.basis_Li;
  ab.U22 = dd.basis_Nmip.adjoint() * U * dd.basis_Nip;

  // All lateral factors live on the L_{-i} coordinates: Y = U11 V_i^H,
  // M lands in the defect space of Y*, G departs from the defect space
  // of Y.  The pseudoinverses cut along those defect spaces, which is
  // where the factors are canonically supported.
  ab.Y = ab.U11 * dd.V_i.adjoint();
  const Matrix dy = defect(ab.Y, tol);
  const Matrix dystar = defect_adjoint(ab.Y, tol);
  ab.M = pseudo_inverse(dystar, tol) * ab.U12;
  ab.G = (ab.U21 * dd.V_i.adjoint()) * pseudo_inverse(dy, tol);
  const Matrix dm = defect(ab.M, tol);
  const Matrix dgs = defect_adjoint(ab.G, tol);
  ab.X = pseudo_inverse(dgs, tol) *
         (ab.U22 + ab.G * ab.Y.adjoint() * ab.M) * pseudo_inverse(dm, tol);

  Matrix refit = Matrix::Zero(dd.n_minus, dd.n_plus);
  refit += dd.basis_Lmi * (ab.Y * dd.V_i) * dd.basis_Li.adjoint();
  refit += dd.basis_Lmi * (dystar * ab.M) * dd.basis_Nip.adjoint();
  refit += dd.basis_Nmip * (ab.G * dy * dd.V_i) * dd.basis_Li.adjoint();
  refit += dd.basis_Nmip *
           (-ab.G * ab.Y.adjoint() * ab.M + dgs * ab.X * dm) *
           dd.basis_Nip.adjoint();
  ab.reassembly_residual = operator_norm(U - refit);
  return ab;
}

IntersectionKernel intersection_kernels(const DefectData& dd,
                                        const ExtensionParam& param,
                                        const TolerancePolicy& tol) {
  const Matrix& U = param.U;
  if (U.rows() != dd.n_minus || U.cols() != dd.n_plus)
    throw DimensionMismatch("intersection_kernels: U must map the N_i "
                            "coordinates to the N_{-i} coordinates");
  // (I - U) phi falls into H_0 iff the lateral projections match up:
  // P_{L_{-i}} U phi = V_i P_{L_i} phi, and mirrored for the adjoint.
  const Matrix cond_plus =
      dd.basis_Lmi.adjoint() * U - dd.V_i * dd.basis_Li.adjoint();
  const Matrix cond_minus = dd.basis_Li.adjoint() * U.adjoint() -
                            dd.V_i.adjoint() * dd.basis_Lmi.adjoint();
  IntersectionKernel out;
  out.basis_Ni = null_space(cond_plus, tol);
  out.basis_Nmi = null_space(cond_minus, tol);

  // Recompute the membership condition at the model level: the kernel
  // vectors, mapped back to actual sequences, must have (I - U) phi
  // orthogonal to every lateral basis vector.
  double resid = 0.0;
  const Index pdim = static_cast<Index>(dd.basis_L.size());
  for (Index a = 0; a < out.basis_Ni.cols(); ++a) {
    const Vector c = out.basis_Ni.col(a);
    ModelVec diff = dd.from_coords(c, +1);
    diff -= dd.from_coords(Vector(U * c), -1);
    for (Index j = 0; j < pdim; ++j)
      resid = std::max(resid, std::abs(inner(diff, dd.basis_L[j])));
  }
  for (Index a = 0; a < out.basis_Nmi.cols(); ++a) {
    const Vector c = out.basis_Nmi.col(a);
    ModelVec diff = dd.from_coords(c, -1);
    diff -= dd.from_coords(Vector(U.adjoint() * c), +1);
    for (Index j = 0; j < pdim; ++j)
      resid = std::max(resid, std::abs(inner(diff, dd.basis_L[j])));
  }
  out.direct_condition_residual = resid;
  return out;
}

Matrix action_on_Np(const Subspace& dom, const Matrix& action) {
  if (action.cols() != dom.dim())
    throw DimensionMismatch("action_on_Np: one action column per domain "
                            "basis vector expected");
  return action * dom.basis().adjoint();
}

double compression_reports_agree(const CompressionReport& a,
                                 const CompressionReport& b) {
  double r = 0.0;
  r = std::max(r, operator_norm(a.dom_U0.projector() - b.dom_U0.projector()));
  r = std::max(r, operator_norm(action_on_Np(a.dom_U0, a.U0) -
                                action_on_Np(b.dom_U0, b.U0)));
  r = std::max(r, operator_norm(a.dom_Ustar0.projector() -
                                b.dom_Ustar0.projector()));
  r = std::max(r, operator_norm(action_on_Np(a.dom_Ustar0, a.Ustar0) -
                                action_on_Np(b.dom_Ustar0, b.Ustar0)));
  return r;
}

CompressionReport compress(const DefectData& dd, const ExtensionParam& param,
                           const TolerancePolicy& tol) {
  const Index l = dd.V_i.cols();
  const Index np = dd.np_plus;
  const Index nm = dd.np_minus;

  AdaptedBlocks ab = adapted_blocks(dd, param.U, tol);
  if (l > 0 &&
      numerical_rank(Matrix(Matrix::Identity(l, l) - ab.Y), tol) < l)
    throw Inadmissible("compress: the lateral parameter has a fixed vector, "
                       "so the extension leaks out of the operator class");

  const Matrix dy = defect(ab.Y, tol);
  const Matrix dystar = defect_adjoint(ab.Y, tol);
  const Matrix dm = defect(ab.M, tol);
  const Matrix dgs = defect_adjoint(ab.G, tol);

  CompressionReport rep;

  // Domain: N'_i directions whose M-image, pushed through the defect of
  // Y*, stays inside ran(I - Y).  With an invertible I - Y (the whole
  // admissible finite-dimensional regime) the constraint is void.
  Matrix constraint = Matrix::Zero(0, np);
  if (l > 0) {
    const Matrix ran_iy =
        column_space(Matrix(Matrix::Identity(l, l) - ab.Y), tol);
    const Matrix off_range =
        Matrix::Identity(l, l) - ran_iy * ran_iy.adjoint();
    constraint = off_range * (dystar * ab.M);
  }
  rep.dom_U0 = Subspace::from_orthonormal(null_space(constraint, tol));

  // Action, route one: Schur complement of the adapted blocks in the
  // lateral corner, pivoted at V_i.
  Matrix blocks(l + nm, l + np);
  blocks.topLeftCorner(l, l) = ab.U11;
  blocks.topRightCorner(l, np) = ab.U12;
  blocks.bottomLeftCorner(nm, l) = ab.U21;
  blocks.bottomRightCorner(nm, np) = ab.U22;
  const Matrix schur = schur_complement(blocks, l, dd.V_i, tol);

  // Action, route two: lateral-factor formula.
  Matrix mid = Matrix::Zero(l, l);
  if (l > 0) {
    const Matrix iy = Matrix::Identity(l, l) - ab.Y;
    mid = -ab.Y.adjoint() + dy * iy.partialPivLu().solve(dystar);
  }
  const Matrix factored = ab.G * mid * ab.M + dgs * ab.X * dm;

  rep.U0 = schur * rep.dom_U0.basis();
  double internal =
      operator_norm(Matrix((schur - factored) * rep.dom_U0.basis()));

  // Adjoint side: same two routes on the adjoint blocks.
  Matrix constraint_star = Matrix::Zero(0, nm);
  if (l > 0) {
    const Matrix ran_iys =
        column_space(Matrix(Matrix::Identity(l, l) - ab.Y.adjoint()), tol);
    const Matrix off_range =
        Matrix::Identity(l, l) - ran_iys * ran_iys.adjoint();
    constraint_star = off_range * (dy * ab.G.adjoint());
  }
  rep.dom_Ustar0 =
      Subspace::from_orthonormal(null_space(constraint_star, tol));

  Matrix blocks_star(l + np, l + nm);
  blocks_star.topLeftCorner(l, l) = ab.U11.adjoint();
  blocks_star.topRightCorner(l, nm) = ab.U21.adjoint();
  blocks_star.bottomLeftCorner(np, l) = ab.U12.adjoint();
  blocks_star.bottomRightCorner(np, nm) = ab.U22.adjoint();
  const Matrix schur_star =
      schur_complement(blocks_star, l, Matrix(dd.V_i.adjoint()), tol);

  Matrix mid_star = Matrix::Zero(l, l);
  if (l > 0) {
    const Matrix iys = Matrix::Identity(l, l) - ab.Y.adjoint();
    mid_star = -ab.Y + dystar * iys.partialPivLu().solve(dy);
  }
  const Matrix factored_star =
      ab.M.adjoint() * mid_star * ab.G.adjoint() + dm * ab.X.adjoint() * dgs;

  rep.Ustar0 = schur_star * rep.dom_Ustar0.basis();
  internal = std::max(
      internal, operator_norm(Matrix((schur_star - factored_star) *
                                     rep.dom_Ustar0.basis())));

  rep.internal_residual = internal;
  rep.classification = classify(rep.dom_U0, rep.U0, rep.dom_Ustar0, np, nm, tol);
  rep.deficiency_of_compression = {np - rep.dom_U0.dim(),
                                   nm - rep.dom_Ustar0.dim()};
  return rep;
}

CompressionReport compress_direct(const Model& model, const ExtensionOp& ext,
                                  const TolerancePolicy& tol) {
  if (model_m(model) != model_m(ext.model()))
    throw DimensionMismatch("compress_direct: model does not match the one "
                            "the extension was built on");
  const DefectData& dd = ext.dd();
  const Matrix& U = ext.param().U;
  const Index np = dd.np_plus;
  const Index nm = dd.np_minus;
  const Index pdim = static_cast<Index>(dd.basis_L.size());

  // Membership conditions assembled from sequence-level inner products:
  // column k holds <(I - U) e_k, l_j> over the lateral basis.
  Matrix cond(pdim, dd.n_plus);
  for (Index k = 0; k < dd.n_plus; ++k) {
    Vector e = Vector::Zero(dd.n_plus);
    e(k) = 1.0;
    ModelVec diff = dd.from_coords(e, +1);
    diff -= dd.from_coords(Vector(U * e), -1);
    for (Index j = 0; j < pdim; ++j) cond(j, k) = inner(diff, dd.basis_L[j]);
  }
  Matrix cond_star(pdim, dd.n_minus);
  for (Index k = 0; k < dd.n_minus; ++k) {
    Vector e = Vector::Zero(dd.n_minus);
    e(k) = 1.0;
    ModelVec diff = dd.from_coords(e, -1);
    diff -= dd.from_coords(Vector(U.adjoint() * e), +1);
    for (Index j = 0; j < pdim; ++j)
      cond_star(j, k) = inner(diff, dd.basis_L[j]);
  }
  const Matrix ker_plus = null_space(cond, tol);
  const Matrix ker_minus = null_space(cond_star, tol);

  // N' basis vectors as actual model sequences, for projecting the
  // kernel and its image without touching the coordinate Gram matrices.
  std::vector<ModelVec> nprime_plus, nprime_minus;
  nprime_plus.reserve(np);
  nprime_minus.reserve(nm);
  for (Index r = 0; r < np; ++r)
    nprime_plus.push_back(dd.from_coords(Vector(dd.basis_Nip.col(r)), +1));
  for (Index s = 0; s < nm; ++s)
    nprime_minus.push_back(dd.from_coords(Vector(dd.basis_Nmip.col(s)), -1));

  const Index d = ker_plus.cols();
  Matrix P(np, d), Q(nm, d);
  for (Index a = 0; a < d; ++a) {
    const Vector c = ker_plus.col(a);
    const ModelVec phi = dd.from_coords(c, +1);
    const ModelVec u_phi = dd.from_coords(Vector(U * c), -1);
    for (Index r = 0; r < np; ++r) P(r, a) = inner(phi, nprime_plus[r]);
    for (Index s = 0; s < nm; ++s) Q(s, a) = inner(u_phi, nprime_minus[s]);
  }
  if (numerical_rank(P, tol) < d)
    throw DegenerateProjection("compress_direct: the projection onto N'_i "
                               "collapses part of the intersection kernel");

  CompressionReport rep;
  rep.dom_U0 = Subspace::from_columns(P, tol);
  const Matrix graph = Q * pseudo_inverse(P, tol);
  double internal = operator_norm(Matrix(graph * P - Q));
  rep.U0 = graph * rep.dom_U0.basis();

  const Index ds = ker_minus.cols();
  Matrix Ps(nm, ds), Qs(np, ds);
  for (Index a = 0; a < ds; ++a) {
    const Vector c = ker_minus.col(a);
    const ModelVec psi = dd.from_coords(c, -1);
    const ModelVec uh_psi = dd.from_coords(Vector(U.adjoint() * c), +1);
    for (Index s = 0; s < nm; ++s) Ps(s, a) = inner(psi, nprime_minus[s]);
    for (Index r = 0; r < np; ++r) Qs(r, a) = inner(uh_psi, nprime_plus[r]);
  }
  if (numerical_rank(Ps, tol) < ds)
    throw DegenerateProjection("compress_direct: the projection onto N'_{-i} "
                               "collapses part of the adjoint kernel");
  rep.dom_Ustar0 = Subspace::from_columns(Ps, tol);
  const Matrix graph_star = Qs * pseudo_inverse(Ps, tol);
  internal = std::max(internal, operator_norm(Matrix(graph_star * Ps - Qs)));
  rep.Ustar0 = graph_star * rep.dom_Ustar0.basis();

  rep.internal_residual = internal;
  rep.classification = classify(rep.dom_U0, rep.U0, rep.dom_Ustar0, np, nm, tol);
  rep.deficiency_of_compression = {np - rep.dom_U0.dim(),
                                   nm - rep.dom_Ustar0.dim()};
  return rep;
}

CompressionReport compress_structured(const StructuredParam& param,
                                      const TolerancePolicy& tol) {
  validate(param, tol);
  const Index np = param.np_plus;
  const Index nm = param.np_minus;
  const Matrix dm = defect(param.M, tol);
  const Matrix dgs = defect_adjoint(param.G, tol);

  CompressionReport rep;
  // The defect coordinates of D_{Y*} M phi' are M phi' itself, and each
  // coordinate direction is certified outside ran(I - Y); membership
  // therefore means M phi' = 0 exactly.
  rep.dom_U0 = Subspace::from_orthonormal(null_space(param.M, tol));
  rep.dom_Ustar0 =
      Subspace::from_orthonormal(null_space(Matrix(param.G.adjoint()), tol));

  // The certificates must confirm the rank decision: kernel directions
  // are members, complement directions are excluded.
  auto check_side = [&](const Subspace& dom, const Matrix& map,
                        auto membership) {
    for (Index a = 0; a < dom.dim(); ++a) {
      const Vector img = map * dom.basis().col(a);
      if (membership(img).kind != SeqCertificate::Kind::member)
        throw DegenerateProjection("compress_structured: a kernel direction "
                                   "failed its membership certificate");
    }
    const Subspace comp = dom.complement(tol);
    for (Index a = 0; a < comp.dim(); ++a) {
      const Vector img = map * comp.basis().col(a);
      if (membership(img).kind != SeqCertificate::Kind::non_member)
        throw DegenerateProjection("compress_structured: a complement "
                                   "direction slipped past its certificate");
    }
  };
  check_side(rep.dom_U0, param.M, [&](const Vector& c) {
    return membership_in_ran_id_minus_y(param.y, c, tol.eq_tol);
  });
  check_side(rep.dom_Ustar0, Matrix(param.G.adjoint()), [&](const Vector& c) {
    return membership_in_ran_id_minus_ystar(param.y, c, tol.eq_tol);
  });

  rep.U0 = dgs * param.X * dm * rep.dom_U0.basis();
  rep.Ustar0 = dm * param.X.adjoint() * dgs * rep.dom_Ustar0.basis();
  rep.internal_residual = 0.0;
  rep.classification = classify(rep.dom_U0, rep.U0, rep.dom_Ustar0, np, nm, tol);
  rep.deficiency_of_compression = {np - rep.dom_U0.dim(),
                                   nm - rep.dom_Ustar0.dim()};
  return rep;
}

RangePredicateReport range_predicates(const Matrix& Y,
                                      const TolerancePolicy& tol) {
  if (Y.rows() != Y.cols())
    throw DimensionMismatch("range_predicates: Y must be square");
  RangePredicateReport rep;
  rep.contraction = is_contraction(Y, tol);
  if (!rep.contraction) return rep;

  const Index n = Y.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix iy = eye - Y;
  const Matrix iys = eye - Y.adjoint();
  const Matrix dy = defect(Y, tol);
  const Matrix dystar = defect_adjoint(Y, tol);
  rep.dim_dy = numerical_rank(dy, tol);
  rep.dim_dystar = numerical_rank(dystar, tol);
  rep.ker_id_minus_y_trivial = (numerical_rank(iy, tol) == n);

  const Subspace ran_iy = Subspace::from_columns(iy, tol);
  const Subspace ran_iys = Subspace::from_columns(iys, tol);
  const Subspace ran_dy = Subspace::from_columns(dy, tol);
  const Subspace ran_dystar = Subspace::from_columns(dystar, tol);

  rep.omega_y = subspace_meet(ran_iy, ran_dystar, tol);
  rep.omega_ystar = subspace_meet(ran_iys, ran_dy, tol);
  rep.omega_y_trivial = rep.omega_y.dim() == 0;
  rep.omega_ystar_trivial = rep.omega_ystar.dim() == 0;

  // Three-way coincidence of the joined ranges with the range of the
  // square root of I - Re Y.  At finite dimension the square root has
  // the same range as I - Re Y itself, and the latter avoids the
  // sqrt(eps) noise floor of the root.
  const Subspace join_plus = subspace_join(ran_dystar, ran_iy, tol);
  const Subspace join_minus = subspace_join(ran_dy, ran_iys, tol);
  const Matrix re_gap = eye - (Y + Y.adjoint()) / 2.0;
  const Subspace sqrt_range = Subspace::from_columns(re_gap, tol);
  rep.join_identity = join_plus.same_as(join_minus, tol) &&
                      join_plus.same_as(sqrt_range, tol);

  // The Cayley-type map (I - Y*)(I - Y)^{-1} must carry one range
  // intersection onto the other.  Fixed vectors of Y are fixed for Y*
  // as well, so the choice of preimage does not matter.
  {
    const Matrix mapped =
        iys * pseudo_inverse(iy, tol) * rep.omega_y.basis();
    const Subspace mapped_span = Subspace::from_columns(mapped, tol);
    rep.item3_residual = operator_norm(mapped_span.projector() -
                                       rep.omega_ystar.projector());
  }

  // Norm and range identities on the vectors h whose D_{Y*} image lies
  // in ran(I - Y); vacuous (residuals stay -1) when no such h exists.
  {
    const Matrix off_range = eye - ran_iy.projector();
    const Matrix premise = null_space(Matrix(off_range * dystar), tol);
    if (premise.cols() > 0) {
      const Matrix iy_pinv = pseudo_inverse(iy, tol);
      double norm_resid = 0.0;
      double range_resid = 0.0;
      for (Index a = 0; a < premise.cols(); ++a) {
        const Vector h = premise.col(a);
        const Vector w = iy_pinv * (dystar * h);
        const Vector v = -Y.adjoint() * h + dy * w;
        // relative to the solve scale: w passes through (I - Y)^{-1},
        // whose conditioning is not bounded by the hypotheses
        const double scale = std::max(1.0, w.norm());
        norm_resid =
            std::max(norm_resid, std::abs(v.norm() - h.norm()) / scale);
        range_resid =
            std::max(range_resid, (dy * v - iys * w).norm() / scale);
      }
      rep.item4_norm_residual = norm_resid;
      rep.item4_range_residual = range_resid;
    }
  }

  rep.ran_dystar_in_ran_idmy = ran_iy.contains(ran_dystar, tol);
  rep.ran_idmy_eq_sqrt = ran_iy.same_as(sqrt_range, tol);
  rep.ran_dy_in_ran_idmystar = ran_iys.contains(ran_dy, tol);
  rep.ran_idmystar_eq_sqrt = ran_iys.same_as(sqrt_range, tol);
  rep.ran_dy2_in_ran_idmystar =
      ran_iys.contains(Subspace::from_columns(Matrix(dy * dy), tol), tol);
  rep.ran_idmy_in_ran_idmystar = ran_iys.contains(ran_iy, tol);
  return rep;
}

RangePredicateReport range_predicates(const StructuredY& y,
                                      const TolerancePolicy&) {
  RangePredicateReport rep;
  rep.contraction = true;
  rep.ker_id_minus_y_trivial = y.facts.ker_id_minus_y_trivial;
  rep.omega_y_trivial = y.facts.omega_y_trivial;
  rep.omega_ystar_trivial = y.facts.omega_ystar_trivial;
  rep.dim_dy = y.facts.dim_dy;
  rep.dim_dystar = y.facts.dim_dystar;
  rep.certificates = y.facts.certificates;
  return rep;
}

double l1_identity_check(
    const Matrix& K, const std::vector<std::pair<Vector, Vector>>& F_img_pairs,
    const Matrix& M_op, const Matrix& X, const TolerancePolicy& tol) {
  if (!is_contraction(K, tol) || !is_contraction(M_op, tol) ||
      !is_contraction(X, tol))
    throw PreconditionViolated("l1_identity_check: K, M and X must be "
                               "contractions");
  if (X.rows() != K.rows() || X.cols() != M_op.cols())
    throw DimensionMismatch("l1_identity_check: X must map the domain of M "
                            "into the codomain of K");
  const Matrix dm = defect(M_op, tol);
  const Matrix dx = defect(X, tol);
  const Matrix dk = defect(K, tol);
  const Matrix dkstar = defect_adjoint(K, tol);

  double worst = 0.0;
  for (const auto& [phi, g] : F_img_pairs) {
    if (phi.size() != M_op.cols() || g.size() != K.cols())
      throw DimensionMismatch("l1_identity_check: pair sizes must match the "
                              "domains of M and K");
    const double m_norm = (M_op * phi).norm();
    if (g.norm() > m_norm + tol.eq_tol)
      throw PreconditionViolated("l1_identity_check: the pair data is not "
                                 "contractive over M");
    const Vector d = dm * phi;
    const Vector w = K * g + dkstar * (X * d);
    const double lhs = phi.squaredNorm() - w.squaredNorm();
    const double rhs = m_norm * m_norm - g.squaredNorm() +
                       (dx * d).squaredNorm() +
                       (dk * g - K.adjoint() * (X * d)).squaredNorm();
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

BlockParametrization block_parametrize(const Matrix& A, const Matrix& M,
                                       const Matrix& K, const Matrix& X,
                                       const TolerancePolicy& tol) {
  if (!is_contraction(A, tol)) throw NotAContraction("block_parametrize: A");
  if (!is_contraction(M, tol)) throw NotAContraction("block_parametrize: M");
  if (!is_contraction(K, tol)) throw NotAContraction("block_parametrize: K");
  if (!is_contraction(X, tol)) throw NotAContraction("block_parametrize: X");
  const Index q = A.rows();
  const Index p = A.cols();
  const Index m2 = M.cols();
  const Index k2 = K.rows();
  if (M.rows() != q)
    throw DimensionMismatch("block_parametrize: M must land in the codomain "
                            "of A");
  if (K.cols() != p)
    throw DimensionMismatch("block_parametrize: K must act on the domain "
                            "of A");
  if (X.rows() != k2 || X.cols() != m2)
    throw DimensionMismatch("block_parametrize: X couples the M column "
                            "space with the K row space");

  const Matrix da = defect(A, tol);
  const Matrix das = defect_adjoint(A, tol);
  const Matrix dm = defect(M, tol);
  const Matrix dks = defect_adjoint(K, tol);

  const Matrix ran_das = column_space(das, tol);
  if (operator_norm(Matrix(M - ran_das * (ran_das.adjoint() * M))) >
      tol.eq_tol)
    throw RangeCompatibility("block_parametrize: ran M must lie in the "
                             "defect space of A*");
  const Matrix ran_da = column_space(da, tol);
  if (operator_norm(Matrix(K - (K * ran_da) * ran_da.adjoint())) > tol.eq_tol)
    throw RangeCompatibility("block_parametrize: K must be supported on the "
                             "defect space of A");
  const Matrix ran_dm = column_space(dm, tol);
  const Matrix ran_dks = column_space(dks, tol);
  if (operator_norm(Matrix(
          X - ran_dks * (ran_dks.adjoint() * X * ran_dm) * ran_dm.adjoint())) >
      tol.eq_tol)
    throw RangeCompatibility("block_parametrize: X must map the defect space "
                             "of M into the defect space of K*");

  BlockParametrization out;
  out.U.resize(q + k2, p + m2);
  out.U.topLeftCorner(q, p) = A;
  out.U.topRightCorner(q, m2) = das * M;
  out.U.bottomLeftCorner(k2, p) = K * da;
  out.U.bottomRightCorner(k2, m2) = -K * A.adjoint() * M + dks * X * dm;

  const double defects =
      std::max({operator_norm(Matrix(defect(X, tol) * dm)),
                operator_norm(Matrix(defect(K, tol) * da)),
                operator_norm(Matrix(defect_adjoint(X, tol) * dks)),
                operator_norm(Matrix(defect_adjoint(M, tol) * das))});
  out.unitary = defects <= 10 * tol.eq_tol;
  return out;
}

} // namespace extcalc
