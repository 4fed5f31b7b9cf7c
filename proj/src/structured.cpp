#include "extcalc/structured.hpp"

#include <sstream>
#include <utility>

namespace extcalc {

namespace {

// ran(I - W_+) does not contain the first unit vector of l2(N): the
// formal solution of (I - W_+) x = e_0 is the constant sequence 1, so
// the affine solver reports a non-member witness with tail ratio 1.
SeqCertificate forward_range_gap() {
  const auto res =
      solve_affine_shift(Complex(1, 0), Complex(-1, 0),
                         EvGeoSeq::unit(0, /*one_sided=*/true), 1);
  SeqCertificate cert = res.cert;
  cert.note = "e0 outside ran(I - W+): " + cert.note;
  return cert;
}

void append(std::vector<SeqCertificate>& into,
            const std::vector<SeqCertificate>& from) {
  into.insert(into.end(), from.begin(), from.end());
}

}  // namespace

StructuredY forward_shift_y(Index multiplicity) {
  if (multiplicity < 1)
    throw DimensionMismatch("forward_shift_y: multiplicity must be positive");
  StructuredY y;
  y.kind = StructuredY::Kind::forward_shift;
  y.multiplicity = multiplicity;
  y.facts.dim_dy = 0;        // the shift is isometric
  y.facts.dim_dystar = multiplicity;  // one defect direction per copy

  SeqCertificate ker = kernel_certificate_shift(Complex(1, 0), Complex(-1, 0));
  ker.note = "ker(I - W+) on l2(N): " + ker.note;
  y.facts.ker_id_minus_y_trivial =
      ker.kind == SeqCertificate::Kind::trivial_kernel;

  SeqCertificate gap = forward_range_gap();
  y.facts.omega_y_trivial = gap.kind == SeqCertificate::Kind::non_member;

  SeqCertificate star;
  star.kind = SeqCertificate::Kind::member;
  star.note = "D_Y = 0 for the forward shift, so ran(I - Y*) \\cap ran D_Y "
              "is trivially {0}";
  y.facts.omega_ystar_trivial = true;

  y.facts.certificates = {ker, gap, star};
  return y;
}

StructuredY backward_shift_y(Index multiplicity) {
  if (multiplicity < 1)
    throw DimensionMismatch("backward_shift_y: multiplicity must be positive");
  StructuredY y;
  y.kind = StructuredY::Kind::backward_shift;
  y.multiplicity = multiplicity;
  y.facts.dim_dy = multiplicity;
  y.facts.dim_dystar = 0;  // the adjoint of Y = W+* is isometric

  SeqCertificate ker =
      kernel_certificate_backshift(Complex(1, 0), Complex(-1, 0));
  ker.note = "ker(I - W+*) on l2(N): " + ker.note;
  y.facts.ker_id_minus_y_trivial =
      ker.kind == SeqCertificate::Kind::trivial_kernel;

  SeqCertificate omega;
  omega.kind = SeqCertificate::Kind::member;
  omega.note = "D_{Y*} = 0 for the backward shift, so ran(I - Y) \\cap "
               "ran D_{Y*} is trivially {0}";
  y.facts.omega_y_trivial = true;

  // ran(I - Y*) = ran(I - W+) misses the defect direction e0 of D_Y.
  SeqCertificate gap = forward_range_gap();
  y.facts.omega_ystar_trivial = gap.kind == SeqCertificate::Kind::non_member;

  y.facts.certificates = {ker, omega, gap};
  return y;
}

StructuredY finite_unitary_y(const Matrix& W, const TolerancePolicy& tol) {
  if (W.rows() != W.cols())
    throw DimensionMismatch("finite_unitary_y: block must be square");
  if (!is_unitary(W, tol))
    throw NotUnitary("finite_unitary_y: block is not unitary");
  const Matrix gap = Matrix::Identity(W.rows(), W.cols()) - W;
  const double sigma = smallest_singular_value(gap);
  if (W.rows() > 0 && sigma < tol.rank_tol)
    throw DegenerateU("finite_unitary_y: 1 is an eigenvalue of the block");

  StructuredY y;
  y.kind = StructuredY::Kind::finite_unitary;
  y.multiplicity = W.rows();
  y.finite_block = W;
  y.facts.ker_id_minus_y_trivial = true;
  y.facts.omega_y_trivial = true;
  y.facts.omega_ystar_trivial = true;
  y.facts.dim_dy = 0;
  y.facts.dim_dystar = 0;

  SeqCertificate cert;
  cert.kind = SeqCertificate::Kind::trivial_kernel;
  cert.witness_ratio = Complex(sigma, 0);
  std::ostringstream os;
  os << "finite unitary block: sigma_min(I - W) = " << sigma
     << "; both defect operators vanish";
  cert.note = os.str();
  y.facts.certificates = {cert};
  return y;
}

StructuredY direct_sum_y(std::vector<StructuredY> parts) {
  if (parts.empty())
    throw DimensionMismatch("direct_sum_y: needs at least one part");
  if (parts.size() == 1) return std::move(parts.front());

  StructuredY y;
  y.kind = StructuredY::Kind::direct_sum;
  y.multiplicity = 0;
  y.facts.ker_id_minus_y_trivial = true;
  y.facts.omega_y_trivial = true;
  y.facts.omega_ystar_trivial = true;
  for (const StructuredY& part : parts) {
    // The summands act on orthogonal components, so kernels and range
    // intersections decompose componentwise.
    y.facts.ker_id_minus_y_trivial &= part.facts.ker_id_minus_y_trivial;
    y.facts.omega_y_trivial &= part.facts.omega_y_trivial;
    y.facts.omega_ystar_trivial &= part.facts.omega_ystar_trivial;
    y.facts.dim_dy += part.facts.dim_dy;
    y.facts.dim_dystar += part.facts.dim_dystar;
    append(y.facts.certificates, part.facts.certificates);
  }
  y.parts = std::move(parts);
  return y;
}

StructuredY catalog_y(Index want_dim_dy, Index want_dim_dystar) {
  if (want_dim_dy < 0 || want_dim_dystar < 0)
    throw DimensionMismatch("catalog_y: defect dimensions must be >= 0");
  if (want_dim_dy == 0 && want_dim_dystar == 0)
    return finite_unitary_y(-Matrix::Identity(1, 1));
  if (want_dim_dy == 0) return forward_shift_y(want_dim_dystar);
  if (want_dim_dystar == 0) return backward_shift_y(want_dim_dy);
  std::vector<StructuredY> parts;
  parts.push_back(forward_shift_y(want_dim_dystar));
  parts.push_back(backward_shift_y(want_dim_dy));
  return direct_sum_y(std::move(parts));
}

namespace {

SeqCertificate decide_membership(const Vector& c, Index expected_dim,
                                 double zero_tol, const char* range_name) {
  if (c.size() != expected_dim)
    throw DimensionMismatch("membership test: coordinate size does not match "
                            "the defect dimension");
  Index worst = -1;
  double worst_abs = 0.0;
  for (Index k = 0; k < c.size(); ++k) {
    const double a = std::abs(c(k));
    if (a > worst_abs) {
      worst_abs = a;
      worst = k;
    }
  }
  SeqCertificate cert;
  if (worst_abs <= zero_tol) {
    cert.kind = SeqCertificate::Kind::member;
    cert.note = std::string("zero vector lies in ") + range_name;
    return cert;
  }
  cert.kind = SeqCertificate::Kind::non_member;
  cert.witness_ratio = Complex(1, 0);
  std::ostringstream os;
  os << "defect coordinate " << worst << " = " << worst_abs
     << " rides a shift copy whose unit vector is outside " << range_name
     << " (tail ratio 1)";
  cert.note = os.str();
  return cert;
}

}  // namespace

SeqCertificate membership_in_ran_id_minus_y(const StructuredY& y,
                                            const Vector& c, double zero_tol) {
  return decide_membership(c, y.facts.dim_dystar, zero_tol, "ran(I - Y)");
}

SeqCertificate membership_in_ran_id_minus_ystar(const StructuredY& y,
                                                const Vector& c,
                                                double zero_tol) {
  return decide_membership(c, y.facts.dim_dy, zero_tol, "ran(I - Y*)");
}

void validate(const StructuredParam& param, const TolerancePolicy& tol) {
  const Index a = param.y.facts.dim_dy;
  const Index b = param.y.facts.dim_dystar;
  if (param.M.rows() != b || param.M.cols() != param.np_plus)
    throw DimensionMismatch("structured parameter: M must map the N'_i "
                            "coordinates into the defect space of Y*");
  if (param.G.rows() != param.np_minus || param.G.cols() != a)
    throw DimensionMismatch("structured parameter: G must map the defect "
                            "space of Y into the N'_{-i} coordinates");
  if (param.X.rows() != param.np_minus || param.X.cols() != param.np_plus)
    throw DimensionMismatch("structured parameter: X has the N'_{-i} x N'_i "
                            "coordinate shape");
  if (!is_contraction(param.M, tol))
    throw NotAContraction("structured parameter: M is not a contraction");
  if (!is_contraction(param.G, tol))
    throw NotAContraction("structured parameter: G is not a contraction");
  if (!is_contraction(param.X, tol))
    throw NotAContraction("structured parameter: X is not a contraction");

  // X must act between the defect spaces of M and G*.
  const Matrix dm = defect(param.M, tol);
  const Matrix dgs = defect_adjoint(param.G, tol);
  const Matrix pm = column_space(dm, tol);
  const Matrix pgs = column_space(dgs, tol);
  const Matrix inside =
      pgs * (pgs.adjoint() * param.X * pm) * pm.adjoint();
  if (operator_norm(param.X - inside) > tol.eq_tol)
    throw RangeCompatibility("structured parameter: X is not supported on "
                             "the defect spaces of M and G*");
}

} // namespace extcalc
