#pragma once

#include <optional>
#include <variant>

#include "extcalc/matkit.hpp"
#include "extcalc/symop.hpp"

namespace extcalc {

/// Any of the three operator models, handled uniformly by the extension
/// machinery.
using Model = std::variant<ShiftModel, RestrictedModel, ExitModel>;

Index model_m(const Model& model);
DefectData model_defect_data(const Model& model);
std::vector<ModelVec> model_defect_basis(const Model& model, Complex lambda);
/// (f, Sf) of the Cayley representative h.
std::pair<ModelVec, ModelVec> model_apply(const Model& model, const EvGeoSeq& h);
/// (S - mu) f for the representative h of f.
ModelVec model_range_vector(const Model& model, Complex mu, const EvGeoSeq& h);
/// Representative h of the solution f of (S - mu) f = g, or nullopt when
/// g is outside ran(S - mu) (certified by the sequence solver).
std::optional<EvGeoSeq> model_resolve(const Model& model, Complex mu,
                                      const ModelVec& g);
EvGeoSeq model_random_domain(const Model& model, std::mt19937_64& rng);

/// Parameter of an extension: a contraction (or unitary) from N_i to
/// N_{-i}, expressed in the fixed DefectData bases.
struct ExtensionParam {
  enum class Kind { unitary, contraction };

  Matrix U;
  Kind kind = Kind::contraction;
  /// smallest singular value of (U - V_i P_{L_i}) restricted to L_i;
  /// +inf when L_i = {0} (vacuously admissible)
  double admissibility_cert = 0.0;
};

/// Admissibility certificate: sigma_min of (U - V_i P_{L_i})|L_i.
/// Throws NotAContraction if ||U|| > 1 + eq_tol and Inadmissible when
/// the certificate falls below rank_tol.
double check_admissible(const DefectData& dd, const Matrix& U,
                        const TolerancePolicy& tol = {});

/// The restriction Y = P_{L_{-i}} U V_{-i} | L_{-i}, expressed in the
/// orthonormal bases of DefectData (square of size dim L).
Matrix lateral_parameter(const DefectData& dd, const Matrix& U);

/// regular  <=>  ran(I - Y) = L_{-i}; for finite L this is
/// sigma_min(I - Y) >= rank_tol.  Returns that singular value.
double regularity_cert(const DefectData& dd, const ExtensionParam& param,
                       const TolerancePolicy& tol = {});

/// Extension of the model operator determined by an admissible parameter:
///   dom T = dom S + (I - U) N_i,   T(f_S + (I-U)phi) = S f_S + i phi + i U phi.
/// Unitary U gives the selfadjoint extensions, contractive U the maximal
/// dissipative ones.
class ExtensionOp {
public:
  struct Element {
    ModelVec f;
    ModelVec Tf;
  };

  ExtensionOp(Model model, ExtensionParam param,
              const TolerancePolicy& tol = {});

  const Model& model() const { return model_; }
  const DefectData& dd() const { return dd_; }
  const ExtensionParam& param() const { return param_; }
  bool selfadjoint() const { return param_.kind == ExtensionParam::Kind::unitary; }

  /// Element from a Cayley representative h in dom S and phi given in
  /// N_i coordinates.
  Element eval(const EvGeoSeq& h, const Vector& phi) const;

  /// Recover (f_S, Sf_S, phi) from an element: phi = P_{N_i}(Tf + if)/(2i),
  /// U phi = P_{N_{-i}}(Tf - if)/(2i).
  struct Decomposition {
    ModelVec f_S;
    ModelVec Sf_S;
    Vector phi;
  };
  Decomposition decompose(const Element& el) const;

  /// Solve (T - mu) f = psi; empty when mu is not a point of bounded
  /// invertibility (or psi outside the range).
  std::optional<Element> resolvent(Complex mu, const ModelVec& psi) const;

  /// Cayley transform Y_lambda = (T - lambda)(T - conj(lambda))^{-1}
  /// applied to psi (defined on all of H for Im lambda > 0 when T is
  /// maximal dissipative or selfadjoint).
  std::optional<ModelVec> cayley_apply(Complex lambda, const ModelVec& psi) const;

  /// Random element of dom T (fixed seed owned by caller).
  Element random_element(std::mt19937_64& rng) const;

private:
  Model model_;
  DefectData dd_;
  ExtensionParam param_;
  TolerancePolicy tol_;
};

/// Extension with domain dom S + N_z and action S f_S + z phi_z
/// (Im z > 0).  For z = i this is the U = 0 parameter extension.
class ShtrausExtension {
public:
  ShtrausExtension(Model model, Complex z);

  Complex z() const { return z_; }
  const std::vector<ModelVec>& defect_basis() const { return nz_; }

  struct Element {
    ModelVec f;
    ModelVec Tf;
  };
  /// Element from representative h and N_z coefficients.
  Element eval(const EvGeoSeq& h, const Vector& coeff) const;

private:
  Model model_;
  Complex z_;
  std::vector<ModelVec> nz_;
};

ShtrausExtension shtraus_extension(const Model& model, Complex z);

} // namespace extcalc
