#include "extcalc/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "extcalc/errors.hpp"

namespace extcalc {

namespace {

constexpr double kMarginCap = 1e6;

struct MarginData {
  double margin = kMarginCap;
  double leak = 0.0;
};

// Largest eps with eps * Phi^H Phi <= R on the domain coordinates, where
// R = I - action^H action.  Directions with R-eigenvalue at roundoff
// scale (the action is isometric there) must be annihilated by Phi; the
// caller rejects the spec when `leak` says otherwise.  Everything runs
// off one eigendecomposition of R so the kernel cut happens on the Gram
// data, not on square roots of it.
MarginData strictness_margin(const Matrix& Phi, const Matrix& R,
                             const TolerancePolicy& tol) {
  MarginData out;
  if (Phi.rows() == 0 || Phi.cols() == 0 ||
      operator_norm(Phi) <= tol.rank_tol) {
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(R);
  const auto& ev = es.eigenvalues();
  Matrix scaled(Phi.rows(), Phi.cols());
  Index used = 0;
  for (Index k = 0; k < ev.size(); ++k) {
    const Vector img = Phi * es.eigenvectors().col(k);
    if (ev(k) <= tol.rank_tol) {
      out.leak = std::max(out.leak, img.norm());
    } else {
      scaled.col(used++) = img / std::sqrt(ev(k));
    }
  }
  const double ratio = used ? operator_norm(scaled.leftCols(used)) : 0.0;
  out.margin = ratio * ratio <= 1.0 / kMarginCap ? kMarginCap
                                                 : std::min(kMarginCap, 1.0 / (ratio * ratio));
  return out;
}

double report_vs_spec(const CompressionReport& rep, const DualPairSpec& spec) {
  double r = operator_norm(rep.dom_U0.projector() - spec.dom.projector());
  r = std::max(r, operator_norm(action_on_Np(rep.dom_U0, rep.U0) -
                                action_on_Np(spec.dom, spec.action)));
  r = std::max(r, operator_norm(rep.dom_Ustar0.projector() -
                                spec.dom_star.projector()));
  r = std::max(r, operator_norm(action_on_Np(rep.dom_Ustar0, rep.Ustar0) -
                                action_on_Np(spec.dom_star, spec.action_star)));
  return r;
}

// The four block defect products that decide unitarity of the assembled
// parameter.  The coupling enters through injections acting as the
// identity on its defect coordinates, so its contribution reduces to the
// defects of M, G themselves; the lateral fixed-point fact is carried by
// the coupling certificate (fixed vectors of a contraction and of its
// adjoint coincide, so one kernel certificate covers both sides).
bool blocks_unitary(const StructuredParam& p, const TolerancePolicy& tol) {
  const Matrix dx = defect(p.X, tol);
  const Matrix dxs = defect_adjoint(p.X, tol);
  const Matrix dm = defect(p.M, tol);
  const Matrix dgs = defect_adjoint(p.G, tol);
  double worst = operator_norm(dx * dm);
  worst = std::max(worst, operator_norm(dxs * dgs));
  worst = std::max(worst, p.G.size() ? operator_norm(defect(p.G, tol)) : 0.0);
  worst = std::max(worst, p.M.size() ? operator_norm(defect_adjoint(p.M, tol)) : 0.0);
  return p.y.facts.ker_id_minus_y_trivial && worst <= 10 * tol.eq_tol;
}

std::string dims_of(const Matrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace

DualPairSpec spec_from_report(const CompressionReport& rep) {
  return DualPairSpec{rep.dom_U0, rep.U0, rep.dom_Ustar0, rep.Ustar0};
}

SpecMargins validate_spec(const DualPairSpec& spec, const TolerancePolicy& tol) {
  const Index np = spec.np_plus();
  const Index nm = spec.np_minus();
  const Index d = spec.dom.dim();
  const Index ds = spec.dom_star.dim();
  if (spec.action.rows() != nm || spec.action.cols() != d ||
      spec.action_star.rows() != np || spec.action_star.cols() != ds) {
    throw DimensionMismatch("dual-pair spec: action shapes do not match the domains");
  }
  if (!is_contraction(spec.action, tol) ||
      !is_contraction(spec.action_star, tol)) {
    throw NotAContraction("dual-pair spec: both actions must be contractions");
  }

  SpecMargins m;
  if (d > 0 && ds > 0) {
    m.duality_residual = operator_norm(
        spec.dom_star.basis().adjoint() * spec.action -
        (spec.dom.basis().adjoint() * spec.action_star).adjoint());
  }
  if (m.duality_residual > 10 * tol.eq_tol) {
    throw SpecViolation("dual-pair spec: adjoint pairing fails on the domains");
  }

  const Matrix C0 = spec.dom.complement(tol).basis();
  const Matrix Cs = spec.dom_star.complement(tol).basis();
  const Matrix phi_f = Cs.adjoint() * spec.action;
  const Matrix phi_r = C0.adjoint() * spec.action_star;
  m.strict_part_forward = phi_f.size() ? operator_norm(phi_f) : 0.0;
  m.strict_part_reverse = phi_r.size() ? operator_norm(phi_r) : 0.0;
  if (m.strict_part_forward > 1.0 - tol.rank_tol ||
      m.strict_part_reverse > 1.0 - tol.rank_tol) {
    throw SpecViolation("dual-pair spec: a strict part reaches the isometry boundary");
  }

  const Matrix Rf = d ? (Matrix::Identity(d, d) -
                         spec.action.adjoint() * spec.action)
                          .eval()
                      : Matrix::Zero(0, 0);
  const Matrix Rr = ds ? (Matrix::Identity(ds, ds) -
                          spec.action_star.adjoint() * spec.action_star)
                           .eval()
                       : Matrix::Zero(0, 0);
  const MarginData mf = strictness_margin(phi_f, Rf, tol);
  const MarginData mr = strictness_margin(phi_r, Rr, tol);
  if (mf.leak > 10 * tol.eq_tol || mr.leak > 10 * tol.eq_tol) {
    throw SpecViolation(
        "dual-pair spec: an isometric direction of one action leaves the other domain");
  }
  m.margin_forward = mf.margin;
  m.margin_reverse = mr.margin;

  // Sampled cross-check of the spectral margins on seeded unit vectors.
  std::mt19937_64 rng(0x5eedULL);
  const auto sample = [&](const Matrix& action, const Matrix& phi, double eps,
                          Index dim) {
    for (int k = 0; k < 32 && dim > 0; ++k) {
      Vector x = random_gaussian(dim, 1, rng).col(0);
      x /= x.norm();
      const double slack = (action * x).squaredNorm() +
                           eps * (phi * x).squaredNorm() - 1.0;
      m.sampled_slack = std::max(m.sampled_slack, slack);
    }
  };
  sample(spec.action, phi_f, std::min(m.margin_forward, kMarginCap), d);
  sample(spec.action_star, phi_r, std::min(m.margin_reverse, kMarginCap), ds);
  if (m.sampled_slack > 1e-7) {
    throw SpecViolation("dual-pair spec: sampled vectors violate the spectral margin");
  }
  return m;
}

SynthesisResult synthesize_selfadjoint(const Subspace& dom, const Matrix& action,
                                       const TolerancePolicy& tol) {
  const Index np = dom.ambient_dim();
  const Index nm = action.rows();
  const Index d = dom.dim();
  if (action.cols() != d) {
    throw DimensionMismatch("isometric target: action width must match the domain");
  }
  if (nm < d) {
    throw SpecViolation("isometric target: range space smaller than the domain");
  }
  const double iso_resid =
      d ? operator_norm((action.adjoint() * action - Matrix::Identity(d, d)).eval())
        : 0.0;
  if (iso_resid > 10 * tol.eq_tol) {
    throw SpecViolation("isometric target: action is not isometric on its domain");
  }

  SynthesisResult out;
  {
    std::ostringstream os;
    os << "target: isometric " << dims_of(action) << " map on a " << d
       << "-dim domain in C^" << np << ", isometry residual " << iso_resid;
    out.trace.push_back(os.str());
  }

  const Matrix C0 = dom.complement(tol).basis();
  const Subspace ran = Subspace::from_columns(action, tol);
  const Matrix Cr = ran.complement(tol).basis();

  StructuredParam p;
  p.y = catalog_y(nm - d, np - d);
  p.M = C0.adjoint();
  p.G = Cr;
  p.X = action * dom.basis().adjoint();
  p.np_plus = np;
  p.np_minus = nm;
  validate(p, tol);
  {
    std::ostringstream os;
    os << "coupling: defect dims (" << p.y.facts.dim_dy << ", "
       << p.y.facts.dim_dystar << "); M coisometry " << dims_of(p.M)
       << " annihilating the domain, G isometry " << dims_of(p.G)
       << " filling the range complement, X = target";
    out.trace.push_back(os.str());
  }

  out.param = p;
  out.assembled_unitary = blocks_unitary(p, tol);
  out.round_trip = compress_structured(p, tol);

  DualPairSpec want;
  want.dom = dom;
  want.action = action;
  want.dom_star = ran;
  if (d > 0) {
    // ran.basis() = action * R^{-1} with R unitary, so the reverse action
    // (the inverse isometry) is dom.basis() * R^H on those columns.
    const Matrix R = ran.basis().adjoint() * action;
    want.action_star = dom.basis() * R.adjoint();
  } else {
    want.action_star = Matrix::Zero(np, 0);
  }
  out.round_trip_residual = report_vs_spec(out.round_trip, want);
  {
    std::ostringstream os;
    os << "round trip: residual " << out.round_trip_residual
       << ", unitary blocks: " << (out.assembled_unitary ? "yes" : "no");
    out.trace.push_back(os.str());
  }
  if (out.round_trip_residual > 1e-6) {
    throw SpecViolation("isometric target: assembled parameter failed to reproduce it");
  }
  return out;
}

SynthesisResult synthesize_selfadjoint(const DefectData& dd, const Subspace& dom,
                                       const Matrix& action,
                                       const TolerancePolicy& tol) {
  if (dd.np_plus != dom.ambient_dim() || dd.np_minus != action.rows()) {
    throw DimensionMismatch("isometric target does not fit the model's reduced defect sizes");
  }
  return synthesize_selfadjoint(dom, action, tol);
}

SynthesisResult synthesize_dissipative(const DualPairSpec& spec,
                                       const TolerancePolicy& tol) {
  const SpecMargins margins = validate_spec(spec, tol);
  const Index np = spec.np_plus();
  const Index nm = spec.np_minus();
  const Index d = spec.dom.dim();
  const Index ds = spec.dom_star.dim();
  const Matrix B0 = spec.dom.basis();
  const Matrix Bs = spec.dom_star.basis();
  const Matrix C0 = spec.dom.complement(tol).basis();
  const Matrix Cs = spec.dom_star.complement(tol).basis();

  SynthesisResult out;

  // Step 1: strict parts, polar factors, margins.
  const Matrix phi_f = Cs.adjoint() * spec.action;
  const Matrix phi_r = C0.adjoint() * spec.action_star;
  double polar_resid = 0.0;
  Index rank_f = 0;
  Index rank_r = 0;
  if (phi_f.size() > 0) {
    const auto [abs_f, iso_f] = polar(phi_f, tol);
    polar_resid = std::max(polar_resid, operator_norm(phi_f - abs_f * iso_f));
    rank_f = numerical_rank(phi_f, tol);
  }
  if (phi_r.size() > 0) {
    const auto [abs_r, iso_r] = polar(phi_r, tol);
    polar_resid = std::max(polar_resid, operator_norm(phi_r - abs_r * iso_r));
    rank_r = numerical_rank(phi_r, tol);
  }
  {
    std::ostringstream os;
    os << "step 1: strict parts |Phi| = " << margins.strict_part_forward << " / "
       << margins.strict_part_reverse << " (ranks " << rank_f << " / " << rank_r
       << ", polar residual " << polar_resid << "), margins "
       << margins.margin_forward << " / " << margins.margin_reverse
       << ", duality residual " << margins.duality_residual;
    out.trace.push_back(os.str());
  }

  // Step 2: coupling choice and margin-scaled coisometries.  The scale
  // s^2/(1 - s^2) must stay below the strictness margin, otherwise the
  // column of X prescribed in step 3 leaves the unit ball.
  const double eps_f = std::min(margins.margin_forward, 1.0);
  const double eps_r = std::min(margins.margin_reverse, 1.0);
  const double sG2 = 0.5 * eps_f / (1.0 + eps_f);
  const double sM2 = 0.5 * eps_r / (1.0 + eps_r);
  const double cG = 1.0 / std::sqrt(1.0 - sG2);
  const double cM = 1.0 / std::sqrt(1.0 - sM2);

  StructuredParam p;
  p.y = catalog_y(nm - ds, np - d);
  p.M = std::sqrt(sM2) * C0.adjoint();
  p.G = std::sqrt(sG2) * Cs;
  p.np_plus = np;
  p.np_minus = nm;
  {
    std::ostringstream os;
    os << "step 2: coupling defect dims (" << p.y.facts.dim_dy << ", "
       << p.y.facts.dim_dystar << "), scales s_M = " << std::sqrt(sM2)
       << ", s_G = " << std::sqrt(sG2);
    out.trace.push_back(os.str());
  }

  // Step 3: complete the prescribed column/row data of X.
  const Matrix A11 = Bs.adjoint() * spec.action;
  const Matrix A21 = cG * phi_f;
  const Matrix A12 = cM * phi_r.adjoint();
  const Matrix da = defect(A11, tol);
  const Matrix das = defect_adjoint(A11, tol);
  const Matrix mr = pseudo_inverse(das, tol) * A12;
  const Matrix kc = A21 * pseudo_inverse(da, tol);
  const Matrix z0 = Matrix::Zero(nm - ds, np - d);
  const Matrix xb = block_parametrize(A11, mr, kc, z0, tol).U;
  out.completion_residual =
      std::max(operator_norm((xb.topRightCorner(ds, np - d) - A12).eval()),
               operator_norm((xb.bottomLeftCorner(nm - ds, d) - A21).eval()));
  if (out.completion_residual > 1e-6) {
    throw SpecViolation(
        "dual-pair target: completion cannot hold the prescribed data");
  }
  Matrix row_basis(nm, nm);
  row_basis.leftCols(ds) = Bs;
  row_basis.rightCols(nm - ds) = Cs;
  Matrix col_basis(np, np);
  col_basis.leftCols(d) = B0;
  col_basis.rightCols(np - d) = C0;
  p.X = row_basis * xb * col_basis.adjoint();
  validate(p, tol);
  {
    std::ostringstream os;
    os << "step 3: completion with free parameter 0, block residual "
       << out.completion_residual << ", ||X|| = " << operator_norm(p.X);
    out.trace.push_back(os.str());
  }

  // Step 4: assembly and round trip.
  out.param = p;
  out.assembled_unitary = blocks_unitary(p, tol);
  out.round_trip = compress_structured(p, tol);
  out.round_trip_residual = report_vs_spec(out.round_trip, spec);
  {
    std::ostringstream os;
    os << "step 4: round-trip residual " << out.round_trip_residual;
    out.trace.push_back(os.str());
  }
  if (out.round_trip_residual > 1e-6) {
    throw SpecViolation("dual-pair target: assembled parameter failed to reproduce it");
  }
  return out;
}

SynthesisResult synthesize_dissipative(const DefectData& dd,
                                       const DualPairSpec& spec,
                                       const TolerancePolicy& tol) {
  if (dd.np_plus != spec.np_plus() || dd.np_minus != spec.np_minus()) {
    throw DimensionMismatch("dual-pair target does not fit the model's reduced defect sizes");
  }
  return synthesize_dissipative(spec, tol);
}

SynthesisResult exit_space_extensions(const ShiftModel& base, Index m1,
                                      ExitMode mode,
                                      const TolerancePolicy& tol) {
  const Index m = base.m();
  if (m1 <= 0) {
    throw CatalogMiss("exit space must have a positive dimension");
  }
  if (mode == ExitMode::selfadjoint && m1 != m) {
    throw CatalogMiss(
        "unitary couplings need the exit dimension to equal the deficiency index");
  }
  if (mode == ExitMode::dissipative && m1 < m) {
    throw CatalogMiss(
        "kernel-free couplings need at least as many exit directions as deficiency directions");
  }

  SynthesisResult out;
  StructuredParam p;
  p.y = catalog_y(m1, m1);
  p.np_plus = m;
  p.np_minus = m;
  p.X = Matrix::Zero(m, m);
  if (mode == ExitMode::selfadjoint) {
    p.M = Matrix::Identity(m1, m);
    p.G = Matrix::Identity(m, m1);
  } else {
    const double s = 1.0 / std::sqrt(2.0);
    p.M = Matrix::Zero(m1, m);
    p.M.topRows(m) = s * Matrix::Identity(m, m);
    p.G = Matrix::Zero(m, m1);
    p.G.leftCols(m) = s * Matrix::Identity(m, m);
  }
  validate(p, tol);
  {
    std::ostringstream os;
    os << "exit construction: base deficiency " << m << ", exit dimension " << m1
       << ", " << (mode == ExitMode::selfadjoint ? "unitary" : "scaled kernel-free")
       << " couplings, X = 0";
    out.trace.push_back(os.str());
  }

  out.param = p;
  out.assembled_unitary = blocks_unitary(p, tol);
  out.round_trip = compress_structured(p, tol);

  DualPairSpec trivial;
  trivial.dom = Subspace(m);
  trivial.action = Matrix::Zero(m, 0);
  trivial.dom_star = Subspace(m);
  trivial.action_star = Matrix::Zero(m, 0);
  out.round_trip_residual = report_vs_spec(out.round_trip, trivial);

  ExitCertificates cert;
  const auto& f = p.y.facts;
  cert.core_domain_trivial = f.ker_id_minus_y_trivial && f.omega_y_trivial &&
                             out.round_trip.dom_U0.dim() == 0;
  cert.core_domain_star_trivial = f.ker_id_minus_y_trivial &&
                                  f.omega_ystar_trivial &&
                                  out.round_trip.dom_Ustar0.dim() == 0;
  cert.exit_domain_trivial = false;
  cert.exit_domain_star_trivial = false;
  cert.notes.push_back(
      "exit-side triviality is not certified: the coupling's forward-shift copies "
      "make ker D_Y nonzero, and (I - Y) carries that kernel to nonzero "
      "exit-space domain vectors");
  cert.notes.push_back(
      "no catalog coupling can fix this: ker D_Y = {0} forces ran(I - Y) dense, "
      "which contradicts the trivial-overlap range fact the core side needs");
  out.exit = cert;
  {
    std::ostringstream os;
    os << "certificates: core side " << (cert.core_domain_trivial ? "ok" : "FAILED")
       << " / " << (cert.core_domain_star_trivial ? "ok" : "FAILED")
       << ", exit side honest-uncertified";
    out.trace.push_back(os.str());
  }
  return out;
}

} // namespace extcalc
