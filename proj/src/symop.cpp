#include "extcalc/symop.hpp"

#include <cmath>
#include <random>
#include <set>

#include "extcalc/errors.hpp"

namespace extcalc {

namespace {

Vector pad_exit(const Vector& v, Eigen::Index n) {
  if (v.size() == n) return v;
  Vector out = Vector::Zero(n);
  out.head(v.size()) = v;
  return out;
}

// Modified Gram-Schmidt step: orthogonalize x against an orthonormal list,
// returning the normalized remainder, or nothing when x is (numerically)
// in the span.
template <typename Vec>
std::optional<Vec> gs_remainder(Vec x, const std::vector<Vec>& onb,
                                double rel_tol = 1e-10) {
  const double scale = std::max(1.0, x.norm());
  for (const Vec& b : onb) {
    Complex c = inner(x, b);
    Vec t = b;
    t *= c;
    x -= t;
  }
  // second pass for numerical stability
  for (const Vec& b : onb) {
    Complex c = inner(x, b);
    Vec t = b;
    t *= c;
    x -= t;
  }
  const double r = x.norm();
  if (r <= rel_tol * scale) return std::nullopt;
  x *= Complex(1.0 / r, 0.0);
  return x;
}

} // namespace

ModelVec& ModelVec::operator+=(const ModelVec& o) {
  seq += o.seq;
  const Eigen::Index n = std::max(exit.size(), o.exit.size());
  exit = pad_exit(exit, n) + pad_exit(o.exit, n);
  return *this;
}

ModelVec& ModelVec::operator-=(const ModelVec& o) {
  seq -= o.seq;
  const Eigen::Index n = std::max(exit.size(), o.exit.size());
  exit = pad_exit(exit, n) - pad_exit(o.exit, n);
  return *this;
}

ModelVec& ModelVec::operator*=(Complex c) {
  seq *= c;
  exit *= c;
  return *this;
}

double ModelVec::norm() const {
  return std::hypot(seq.norm(), exit.norm());
}

ModelVec operator+(ModelVec a, const ModelVec& b) { return a += b; }
ModelVec operator-(ModelVec a, const ModelVec& b) { return a -= b; }
ModelVec operator*(Complex c, ModelVec a) { return a *= c; }

Complex inner(const ModelVec& a, const ModelVec& b) {
  Complex s = inner(a.seq, b.seq);
  const Eigen::Index n = std::max(a.exit.size(), b.exit.size());
  if (n > 0) s += pad_exit(b.exit, n).dot(pad_exit(a.exit, n));
  return s;
}

// ---------------------------------------------------------------------------
// ShiftModel

ShiftModel::ShiftModel(Index m) : m_(m) {
  if (m < 1) throw PreconditionViolated("ShiftModel requires m >= 1");
}

bool ShiftModel::in_cayley_domain(const EvGeoSeq& h, double tol) const {
  // The domain of the Cayley transform is the full subspace of sequences
  // vanishing on the hole indices; geometric tails are welcome (resolvent
  // solutions carry them), only one-sided typed vectors are excluded.
  if (h.one_sided()) return false;
  for (Index k = 0; k < m_; ++k) {
    if (std::abs(h.value_at(k)) > tol) return false;
  }
  return true;
}

std::pair<EvGeoSeq, EvGeoSeq> ShiftModel::apply(const EvGeoSeq& h) const {
  if (!in_cayley_domain(h, 1e-12 * std::max(1.0, h.sup_abs()))) {
    throw NotInDomain("apply: h must be finitely supported and vanish on the "
                      "hole indices 0..m-1");
  }
  EvGeoSeq vh = h.shifted(m_);
  EvGeoSeq f = h - vh;
  EvGeoSeq sf = Complex(0, 1) * (h + vh);
  return {f, sf};
}

std::vector<EvGeoSeq> ShiftModel::defect_basis(Complex lambda) const {
  if (lambda.imag() == 0.0) {
    throw PreconditionViolated("defect_basis requires nonreal lambda");
  }
  std::vector<EvGeoSeq> out;
  out.reserve(static_cast<std::size_t>(m_));
  const Complex I(0, 1);
  if (lambda == I) {
    for (Index c = 0; c < m_; ++c) out.push_back(EvGeoSeq::unit(c));
    return out;
  }
  if (lambda == -I) {
    for (Index c = 0; c < m_; ++c) out.push_back(EvGeoSeq::unit(c + m_));
    return out;
  }
  if (lambda.imag() > 0) {
    // decaying downward tails anchored at the holes
    const Complex rho = (lambda - I) / (lambda + I);
    for (Index c = 0; c < m_; ++c) {
      EvGeoSeq v;
      v.add_mode({Side::lower, c, m_, rho, Complex(1, 0)});
      v *= Complex(1.0 / v.norm(), 0.0);
      out.push_back(std::move(v));
    }
  } else {
    // decaying upward tails anchored just above the holes
    const Complex rho = (lambda + I) / (lambda - I);
    for (Index c = 0; c < m_; ++c) {
      EvGeoSeq v;
      v.add_mode({Side::upper, c + m_, m_, rho, Complex(1, 0)});
      v *= Complex(1.0 / v.norm(), 0.0);
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::pair<Complex, Complex> ShiftModel::range_symbol(Complex lambda) const {
  const Complex I(0, 1);
  return {I - lambda, I + lambda};
}

AffineSolveResult ShiftModel::resolve(Complex lambda, const EvGeoSeq& g) const {
  auto [alpha, beta] = range_symbol(lambda);
  AffineSolveResult res = solve_affine_shift(alpha, beta, g, m_);
  if (res.cert.kind != SeqCertificate::Kind::member) return res;
  const EvGeoSeq& h = *res.solution;
  const double scale = std::max(1.0, h.sup_abs());
  for (Index k = 0; k < m_; ++k) {
    if (std::abs(h.value_at(k)) > 1e-10 * scale) {
      AffineSolveResult out;
      out.cert.kind = SeqCertificate::Kind::non_member;
      out.cert.witness_ratio = Complex(1, 0);
      out.cert.note = "formal solution leaves the Cayley domain: g is not in "
                      "ran(S - lambda)";
      return out;
    }
  }
  return res;
}

EvGeoSeq ShiftModel::random_domain(std::mt19937_64& rng, Index span) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<Index, Complex>> kv;
  for (Index k = -span; k <= span; ++k) {
    if (k >= 0 && k < m_) continue;
    kv.emplace_back(k, Complex(u(rng), u(rng)));
  }
  return EvGeoSeq::from_entries(kv);
}

// ---------------------------------------------------------------------------
// RestrictedModel

RestrictedModel::RestrictedModel(ShiftModel base, std::vector<EvGeoSeq> u_list,
                                 const TolerancePolicy& tol)
    : base_(base), u_(std::move(u_list)) {
  if (u_.empty()) throw PreconditionViolated("u_list must be nonempty");
  for (const EvGeoSeq& u : u_) {
    if (u.one_sided() || !u.modes().empty()) {
      throw PreconditionViolated("u_list vectors must be finitely supported "
                                 "bilateral sequences");
    }
    if (u.is_zero(1e-14)) throw PreconditionViolated("u_list vector is zero");
  }
  for (const EvGeoSeq& u : u_) {
    auto q = gs_remainder(u, u_on_, tol.rank_tol);
    if (!q) throw PreconditionViolated("u_list is linearly dependent");
    u_on_.push_back(std::move(*q));
  }
  const Index m = base_.m();
  for (const EvGeoSeq& u : u_) {
    EvGeoSeq c = u - u.shifted(-m);
    for (Index k = 0; k < m; ++k) c.set_entry(k, Complex(0, 0));
    auto q = gs_remainder(c, constraint_, tol.rank_tol);
    if (!q) {
      throw PreconditionViolated(
          "domain constraints are linearly dependent (unexpected for "
          "independent u_list)");
    }
    constraint_.push_back(std::move(*q));
  }
}

bool RestrictedModel::in_domain(const EvGeoSeq& h, double tol) const {
  if (!base_.in_cayley_domain(h, tol * std::max(1.0, h.sup_abs()))) {
    return false;
  }
  const double scale = std::max(1.0, h.norm());
  for (const EvGeoSeq& c : constraint_) {
    if (std::abs(inner(h, c)) > tol * scale) return false;
  }
  return true;
}

std::pair<EvGeoSeq, EvGeoSeq> RestrictedModel::apply(const EvGeoSeq& h) const {
  if (!in_domain(h)) {
    throw NotInDomain("apply: representative violates a lateral constraint "
                      "<(I - V)h, u_j> = 0");
  }
  return base_.apply(h);
}

EvGeoSeq RestrictedModel::project_H0(const EvGeoSeq& x) const {
  EvGeoSeq out = x;
  for (const EvGeoSeq& u : u_on_) {
    out -= inner(x, u) * u;
  }
  return out;
}

std::pair<EvGeoSeq, EvGeoSeq>
RestrictedModel::compress_apply(const EvGeoSeq& h) const {
  auto [f, sf] = apply(h);
  return {f, project_H0(sf)};
}

std::vector<EvGeoSeq>
RestrictedModel::extra_defect_raw(Complex lambda,
                                  const TolerancePolicy&) const {
  if (lambda.imag() == 0.0) {
    throw PreconditionViolated("extra_defect_raw requires nonreal lambda");
  }
  const Index m = base_.m();
  // N_lambda(S') consists of N_lambda(S) plus, per constraint vector u_j,
  // w_j = B g_j with B = (i - conj(lambda)) I + (i + conj(lambda)) W^m and
  // g_j in D the weak solution of  <B h, B g_j> = <(I - W^m) h, u_j>  for
  // all h in D, i.e. (B^H B) g_j = P_D (I - W^{-m}) u_j off the holes.
  //
  // B^H B acts on each residue class mod m as the three-term recurrence
  // with symbol cp r^2 + c0 r + cm = (conj(beta) r + conj(alpha)) *
  // (alpha r + beta).  The factored form gives the characteristic roots
  // without the cancellation a discriminant suffers when they crowd the
  // unit circle (|lambda| large), and each class is solved in closed form
  // through the Green kernel of the recurrence plus a scalar Dirichlet
  // correction at the class's single hole.  B^H B >= (|alpha|-|beta|)^2
  // keeps everything here uniformly bounded.
  auto [alpha, beta] = base_.range_symbol(std::conj(lambda));

  std::vector<EvGeoSeq> out;
  out.reserve(u_.size());

  if (alpha == Complex(0, 0) || beta == Complex(0, 0)) {
    // lambda = +-i: the normal equation is diagonal
    const Complex c0(std::norm(alpha) + std::norm(beta), 0.0);
    for (const EvGeoSeq& u : u_) {
      EvGeoSeq rhs = u - u.shifted(-m);
      for (Index k = 0; k < m; ++k) rhs.set_entry(k, Complex(0, 0));
      EvGeoSeq g = rhs;
      g *= Complex(1, 0) / c0;
      out.push_back(alpha * g + beta * g.shifted(m));
    }
    return out;
  }

  const Complex r_a = -beta / alpha;
  const Complex r_b = -std::conj(alpha) / std::conj(beta);
  const bool a_in = std::abs(beta) < std::abs(alpha);
  const Complex r_in = a_in ? r_a : r_b;  // upward-decaying root, |.| < 1
  const Complex r_out = a_in ? r_b : r_a; // |.| > 1
  const Complex r_dn = Complex(1, 0) / r_out;
  // cp (r_in - r_out), positive with either root assignment
  const double D = std::abs(std::norm(alpha) - std::norm(beta));

  const auto cpow = [](Complex b, Index e) {
    Complex r(1, 0);
    for (Index j = 0; j < e; ++j) r *= b;
    return r;
  };
  const auto green = [&](Index n) {
    return (n >= 0 ? cpow(r_in, n) : cpow(r_dn, -n)) / D;
  };

  for (const EvGeoSeq& u : u_) {
    EvGeoSeq rhs = u - u.shifted(-m);
    for (Index k = 0; k < m; ++k) rhs.set_entry(k, Complex(0, 0));

    std::map<Index, std::map<Index, Complex>> per_class;
    for (const auto& [k, v] : rhs.entries()) {
      if (v == Complex(0, 0)) continue;
      const Index cls = ((k % m) + m) % m;
      per_class[cls][(k - cls) / m] = v;
    }

    EvGeoSeq g;
    for (const auto& [cls, supp] : per_class) {
      const auto x_free = [&](Index n) {
        Complex s(0, 0);
        for (const auto& [k, v] : supp) s += v * green(n - k);
        return s;
      };
      const Complex hole = x_free(0);
      const auto x_at = [&](Index n) {
        const Complex corr =
            hole * (n >= 0 ? cpow(r_in, n) : cpow(r_dn, -n));
        return x_free(n) - corr;
      };
      const Index nlo = std::min<Index>(supp.begin()->first, 0);
      const Index nhi = std::max<Index>(supp.rbegin()->first, 0);
      for (Index n = nlo; n <= nhi; ++n) {
        if (n == 0) continue; // Dirichlet hole, exactly zero
        const Complex v = x_at(n);
        if (v != Complex(0, 0)) g.set_entry(cls + n * m, v);
      }
      const Complex up = x_at(nhi + 1);
      if (up != Complex(0, 0)) {
        g.add_mode({Side::upper, cls + (nhi + 1) * m, m, r_in, up});
      }
      const Complex dn = x_at(nlo - 1);
      if (dn != Complex(0, 0)) {
        g.add_mode({Side::lower, cls + (nlo - 1) * m, m, r_dn, dn});
      }
    }
    out.push_back(alpha * g + beta * g.shifted(m));
  }
  return out;
}

std::vector<EvGeoSeq>
RestrictedModel::defect_basis(Complex lambda, const TolerancePolicy& tol) const {
  std::vector<EvGeoSeq> basis = base_.defect_basis(lambda);
  for (EvGeoSeq& w : extra_defect_raw(lambda, tol)) {
    auto q = gs_remainder(std::move(w), basis, tol.rank_tol);
    if (!q) {
      throw DegenerateU("defect vector collapsed into the base deficiency "
                        "space; lateral data is degenerate");
    }
    basis.push_back(std::move(*q));
  }
  return basis;
}

EvGeoSeq RestrictedModel::random_domain(std::mt19937_64& rng, Index span) const {
  for (int attempt = 0; attempt < 16; ++attempt) {
    EvGeoSeq h = base_.random_domain(rng, span);
    for (const EvGeoSeq& c : constraint_) {
      h -= inner(h, c) * c;
    }
    // repeat once; exact arithmetic makes this already tiny
    for (const EvGeoSeq& c : constraint_) {
      h -= inner(h, c) * c;
    }
    if (h.norm() > 1e-6) return h;
  }
  throw PreconditionViolated("random_domain: constraints annihilate the "
                             "sampling window; enlarge span");
}

// ---------------------------------------------------------------------------
// ExitModel

ExitModel::ExitModel(ShiftModel base, Index m1) : base_(base), m1_(m1) {
  if (m1 < 1) throw PreconditionViolated("ExitModel requires m1 >= 1");
}

std::pair<ModelVec, ModelVec> ExitModel::apply(const EvGeoSeq& h) const {
  auto [f, sf] = base_.apply(h);
  const Vector z = Vector::Zero(m1_);
  return {ModelVec(std::move(f), z), ModelVec(std::move(sf), z)};
}

std::vector<ModelVec> ExitModel::defect_basis(Complex lambda) const {
  std::vector<ModelVec> out;
  for (EvGeoSeq& v : base_.defect_basis(lambda)) {
    out.emplace_back(std::move(v), Vector::Zero(m1_));
  }
  for (Index j = 0; j < m1_; ++j) {
    Vector e = Vector::Zero(m1_);
    e(j) = Complex(1, 0);
    out.emplace_back(EvGeoSeq::zero(), std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// DefectData

Vector DefectData::defect_coords(const ModelVec& x, int sign) const {
  const auto& basis = sign > 0 ? basis_Ni : basis_Nmi;
  Vector c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    c(static_cast<Eigen::Index>(k)) = inner(x, basis[k]);
  }
  return c;
}

ModelVec DefectData::from_coords(const Vector& c, int sign) const {
  const auto& basis = sign > 0 ? basis_Ni : basis_Nmi;
  if (c.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DimensionMismatch("from_coords: coordinate length mismatch");
  }
  ModelVec out;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    ModelVec t = basis[k];
    t *= c(static_cast<Eigen::Index>(k));
    out += t;
  }
  return out;
}

DefectData defect_data(const ShiftModel& model) {
  DefectData d;
  const Complex I(0, 1);
  for (EvGeoSeq& v : model.defect_basis(I)) d.basis_Ni.emplace_back(std::move(v));
  for (EvGeoSeq& v : model.defect_basis(-I)) d.basis_Nmi.emplace_back(std::move(v));
  d.n_plus = static_cast<Index>(d.basis_Ni.size());
  d.n_minus = static_cast<Index>(d.basis_Nmi.size());
  d.p = 0;
  d.np_plus = d.n_plus;
  d.np_minus = d.n_minus;
  d.basis_Li = Matrix::Zero(d.n_plus, 0);
  d.basis_Lmi = Matrix::Zero(d.n_minus, 0);
  d.basis_Nip = Matrix::Identity(d.n_plus, d.n_plus);
  d.basis_Nmip = Matrix::Identity(d.n_minus, d.n_minus);
  d.V_i = Matrix::Zero(0, 0);
  return d;
}

DefectData defect_data(const RestrictedModel& model, const TolerancePolicy& tol) {
  DefectData d;
  const Complex I(0, 1);
  for (EvGeoSeq& v : model.defect_basis(I, tol)) {
    d.basis_Ni.emplace_back(std::move(v));
  }
  for (EvGeoSeq& v : model.defect_basis(-I, tol)) {
    d.basis_Nmi.emplace_back(std::move(v));
  }
  for (const EvGeoSeq& u : model.L_basis()) d.basis_L.emplace_back(u);
  d.n_plus = static_cast<Index>(d.basis_Ni.size());
  d.n_minus = static_cast<Index>(d.basis_Nmi.size());
  d.p = static_cast<Index>(d.basis_L.size());

  Matrix Ci(d.n_plus, d.p), Cmi(d.n_minus, d.p);
  for (Index j = 0; j < d.p; ++j) {
    Ci.col(j) = d.defect_coords(d.basis_L[static_cast<std::size_t>(j)], +1);
    Cmi.col(j) = d.defect_coords(d.basis_L[static_cast<std::size_t>(j)], -1);
  }
  d.basis_Li = column_space(Ci, tol);
  d.basis_Lmi = column_space(Cmi, tol);
  if (d.basis_Li.cols() != d.p || d.basis_Lmi.cols() != d.p) {
    throw DegenerateU("lateral space meets a range subspace: projections of "
                      "L into the deficiency spaces lost rank");
  }
  Matrix A = d.basis_Li.adjoint() * Ci;   // p x p, invertible
  Matrix B = d.basis_Lmi.adjoint() * Cmi;
  d.V_i = B * A.partialPivLu().solve(Matrix::Identity(d.p, d.p));

  d.basis_Nip = Subspace::from_orthonormal(d.basis_Li).complement().basis();
  d.basis_Nmip = Subspace::from_orthonormal(d.basis_Lmi).complement().basis();
  d.np_plus = d.basis_Nip.cols();
  d.np_minus = d.basis_Nmip.cols();
  return d;
}

DefectData defect_data(const ExitModel& model) {
  DefectData d;
  const Complex I(0, 1);
  d.basis_Ni = model.defect_basis(I);
  d.basis_Nmi = model.defect_basis(-I);
  const Index m = model.base().m();
  const Index m1 = model.m1();
  d.n_plus = m + m1;
  d.n_minus = m + m1;
  d.p = m1;
  for (Index j = 0; j < m1; ++j) {
    Vector e = Vector::Zero(m1);
    e(j) = Complex(1, 0);
    d.basis_L.emplace_back(EvGeoSeq::zero(), std::move(e));
  }
  Matrix Li = Matrix::Zero(m + m1, m1);
  Li.bottomRows(m1) = Matrix::Identity(m1, m1);
  Matrix Np = Matrix::Zero(m + m1, m);
  Np.topRows(m) = Matrix::Identity(m, m);
  d.basis_Li = Li;
  d.basis_Lmi = Li;
  d.basis_Nip = Np;
  d.basis_Nmip = Np;
  d.np_plus = m;
  d.np_minus = m;
  d.V_i = Matrix::Identity(m1, m1);
  return d;
}

} // namespace extcalc
