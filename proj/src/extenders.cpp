#include "extcalc/extenders.hpp"

#include <cmath>
#include <limits>

#include "extcalc/errors.hpp"

namespace extcalc {

namespace {
const Complex kI(0, 1);
} // namespace

Index model_m(const Model& model) {
  return std::visit(
      [](const auto& m) -> Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ShiftModel>) return m.m();
        else return m.base().m();
      },
      model);
}

DefectData model_defect_data(const Model& model) {
  return std::visit([](const auto& m) { return defect_data(m); }, model);
}

std::vector<ModelVec> model_defect_basis(const Model& model, Complex lambda) {
  return std::visit(
      [&](const auto& m) -> std::vector<ModelVec> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExitModel>) {
          return m.defect_basis(lambda);
        } else {
          std::vector<ModelVec> out;
          for (EvGeoSeq& v : m.defect_basis(lambda)) out.emplace_back(std::move(v));
          return out;
        }
      },
      model);
}

std::pair<ModelVec, ModelVec> model_apply(const Model& model, const EvGeoSeq& h) {
  return std::visit(
      [&](const auto& m) -> std::pair<ModelVec, ModelVec> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExitModel>) {
          return m.apply(h);
        } else {
          auto [f, sf] = m.apply(h);
          return {ModelVec(std::move(f)), ModelVec(std::move(sf))};
        }
      },
      model);
}

ModelVec model_range_vector(const Model& model, Complex mu, const EvGeoSeq& h) {
  const ShiftModel& base = std::visit(
      [](const auto& m) -> const ShiftModel& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ShiftModel>) return m;
        else return m.base();
      },
      model);
  auto [a, b] = base.range_symbol(mu);
  EvGeoSeq r = a * h + b * h.shifted(base.m());
  if (std::holds_alternative<ExitModel>(model)) {
    return ModelVec(std::move(r), Vector::Zero(std::get<ExitModel>(model).m1()));
  }
  return ModelVec(std::move(r));
}

std::optional<EvGeoSeq> model_resolve(const Model& model, Complex mu,
                                      const ModelVec& g) {
  if (g.exit.size() > 0 && g.exit.norm() > 1e-9 * (1.0 + g.norm())) {
    return std::nullopt; // ranges live in the sequence component
  }
  const ShiftModel& base = std::visit(
      [](const auto& m) -> const ShiftModel& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ShiftModel>) return m;
        else return m.base();
      },
      model);
  AffineSolveResult res = base.resolve(mu, g.seq);
  if (res.cert.kind != SeqCertificate::Kind::member) return std::nullopt;
  if (const auto* rm = std::get_if<RestrictedModel>(&model)) {
    EvGeoSeq f = *res.solution - res.solution->shifted(base.m());
    const double scale = 1.0 + f.norm();
    for (const EvGeoSeq& u : rm->u_list()) {
      if (std::abs(inner(f, u)) > 1e-9 * scale * u.norm()) return std::nullopt;
    }
  }
  return std::move(res.solution);
}

EvGeoSeq model_random_domain(const Model& model, std::mt19937_64& rng) {
  return std::visit(
      [&](const auto& m) -> EvGeoSeq {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExitModel>) {
          return m.base().random_domain(rng);
        } else {
          return m.random_domain(rng);
        }
      },
      model);
}

// ---------------------------------------------------------------------------

double check_admissible(const DefectData& dd, const Matrix& U,
                        const TolerancePolicy& tol) {
  if (U.rows() != dd.n_minus || U.cols() != dd.n_plus) {
    throw DimensionMismatch("check_admissible: U must map N_i coordinates "
                            "to N_{-i} coordinates");
  }
  if (operator_norm(U) > 1.0 + tol.eq_tol) {
    throw NotAContraction("extension parameter must be contractive");
  }
  if (dd.basis_Li.cols() == 0) {
    return std::numeric_limits<double>::infinity();
  }
  Matrix A = U * dd.basis_Li - dd.basis_Lmi * dd.V_i;
  const double cert = smallest_singular_value(A);
  if (cert < tol.rank_tol) {
    throw Inadmissible("parameter agrees with the forbidden isometry on part "
                       "of L_i (certificate " + std::to_string(cert) + ")");
  }
  return cert;
}

Matrix lateral_parameter(const DefectData& dd, const Matrix& U) {
  Matrix U11 = dd.basis_Lmi.adjoint() * U * dd.basis_Li;
  return U11 * dd.V_i.adjoint();
}

double regularity_cert(const DefectData& dd, const ExtensionParam& param,
                       const TolerancePolicy& tol) {
  (void)tol;
  if (dd.basis_Li.cols() == 0) return std::numeric_limits<double>::infinity();
  Matrix Y = lateral_parameter(dd, param.U);
  return smallest_singular_value(
      Matrix::Identity(Y.rows(), Y.cols()) - Y);
}

// ---------------------------------------------------------------------------
// ExtensionOp

ExtensionOp::ExtensionOp(Model model, ExtensionParam param,
                         const TolerancePolicy& tol)
    : model_(std::move(model)), dd_(model_defect_data(model_)),
      param_(std::move(param)), tol_(tol) {
  if (param_.kind == ExtensionParam::Kind::unitary) {
    if (param_.U.rows() != param_.U.cols() || !is_unitary(param_.U, tol_)) {
      throw NotUnitary("selfadjoint extensions require a unitary parameter");
    }
  }
  param_.admissibility_cert = check_admissible(dd_, param_.U, tol_);
}

ExtensionOp::Element ExtensionOp::eval(const EvGeoSeq& h,
                                       const Vector& phi) const {
  auto [fS, SfS] = model_apply(model_, h);
  ModelVec pv = dd_.from_coords(phi, +1);
  ModelVec upv = dd_.from_coords(param_.U * phi, -1);
  Element el;
  el.f = fS + pv - upv;
  el.Tf = SfS + kI * pv + kI * upv;
  return el;
}

ExtensionOp::Decomposition ExtensionOp::decompose(const Element& el) const {
  ModelVec a = el.Tf + kI * el.f;  // (S + i) f_S + 2i phi
  Vector phi = dd_.defect_coords(a, +1) / Complex(0, 2);
  ModelVec pv = dd_.from_coords(phi, +1);
  ModelVec upv = dd_.from_coords(param_.U * phi, -1);
  Decomposition d;
  d.f_S = el.f - pv + upv;
  d.Sf_S = el.Tf - kI * pv - kI * upv;
  d.phi = std::move(phi);
  return d;
}

std::optional<ExtensionOp::Element>
ExtensionOp::resolvent(Complex mu, const ModelVec& psi) const {
  if (mu.imag() == 0.0) return std::nullopt;
  const auto n_adj = model_defect_basis(model_, std::conj(mu));
  const Index n = dd_.n_plus;
  const Index rows = static_cast<Index>(n_adj.size());

  // coordinates of (i - mu) phi + (i + mu) U phi inside N_{conj(mu)},
  // column per N_i basis direction
  Matrix A(rows, n);
  std::vector<ModelVec> ub(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    Vector ej = Vector::Zero(n);
    ej(j) = Complex(1, 0);
    ModelVec bj = dd_.basis_Ni[static_cast<std::size_t>(j)];
    ub[static_cast<std::size_t>(j)] = dd_.from_coords(param_.U * ej, -1);
    for (Index k = 0; k < rows; ++k) {
      A(k, j) = (kI - mu) * inner(bj, n_adj[static_cast<std::size_t>(k)]) +
                (kI + mu) * inner(ub[static_cast<std::size_t>(j)],
                                  n_adj[static_cast<std::size_t>(k)]);
    }
  }
  Vector c(rows);
  for (Index k = 0; k < rows; ++k) {
    c(k) = inner(psi, n_adj[static_cast<std::size_t>(k)]);
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() == 0 ||
      svd.singularValues()(svd.singularValues().size() - 1) <
          1e-12 * std::max(1.0, svd.singularValues()(0))) {
    return std::nullopt; // mu outside the set of bounded invertibility
  }
  Vector x = svd.solve(c);

  ModelVec pv = dd_.from_coords(x, +1);
  ModelVec upv = dd_.from_coords(param_.U * x, -1);
  ModelVec remainder = psi - (kI - mu) * pv - (kI + mu) * upv;
  auto h = model_resolve(model_, mu, remainder);
  if (!h) return std::nullopt;

  auto [fS, SfS] = model_apply(model_, *h);
  Element el;
  el.f = fS + pv - upv;
  el.Tf = SfS + kI * pv + kI * upv;
  // honesty check: (T - mu) f = psi
  ModelVec res = el.Tf - mu * el.f - psi;
  if (res.norm() > 1e-8 * (1.0 + psi.norm())) return std::nullopt;
  return el;
}

std::optional<ModelVec> ExtensionOp::cayley_apply(Complex lambda,
                                                  const ModelVec& psi) const {
  auto el = resolvent(std::conj(lambda), psi);
  if (!el) return std::nullopt;
  return psi - Complex(0, 2 * lambda.imag()) * el->f;
}

ExtensionOp::Element ExtensionOp::random_element(std::mt19937_64& rng) const {
  EvGeoSeq h = model_random_domain(model_, rng);
  Vector phi = random_gaussian(dd_.n_plus, 1, rng).col(0);
  return eval(h, phi);
}

// ---------------------------------------------------------------------------
// ShtrausExtension

ShtrausExtension::ShtrausExtension(Model model, Complex z)
    : model_(std::move(model)), z_(z) {
  if (z.imag() == 0.0) {
    throw PreconditionViolated("Shtraus extensions require nonreal z");
  }
  nz_ = model_defect_basis(model_, z);
}

ShtrausExtension::Element ShtrausExtension::eval(const EvGeoSeq& h,
                                                 const Vector& coeff) const {
  if (coeff.size() != static_cast<Eigen::Index>(nz_.size())) {
    throw DimensionMismatch("Shtraus eval: coefficient length != dim N_z");
  }
  auto [fS, SfS] = model_apply(model_, h);
  ModelVec phi;
  for (std::size_t k = 0; k < nz_.size(); ++k) {
    ModelVec t = nz_[k];
    t *= coeff(static_cast<Eigen::Index>(k));
    phi += t;
  }
  Element el;
  el.f = fS + phi;
  el.Tf = SfS + z_ * phi;
  return el;
}

ShtrausExtension shtraus_extension(const Model& model, Complex z) {
  return ShtrausExtension(model, z);
}

} // namespace extcalc
