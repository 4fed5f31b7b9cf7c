#pragma once

#include <utility>
#include <vector>

#include "extcalc/matkit.hpp"
#include "extcalc/seqspace.hpp"

namespace extcalc {

/// Vector of the model Hilbert space: an l2(Z) component plus a finite
/// exit-space component (empty for models without an exit space).
struct ModelVec {
  EvGeoSeq seq;
  Vector exit{Vector::Zero(0)};

  ModelVec() = default;
  explicit ModelVec(EvGeoSeq s) : seq(std::move(s)) {}
  ModelVec(EvGeoSeq s, Vector e) : seq(std::move(s)), exit(std::move(e)) {}

  ModelVec& operator+=(const ModelVec& o);
  ModelVec& operator-=(const ModelVec& o);
  ModelVec& operator*=(Complex c);
  double norm() const;
};

ModelVec operator+(ModelVec a, const ModelVec& b);
ModelVec operator-(ModelVec a, const ModelVec& b);
ModelVec operator*(Complex c, ModelVec a);
Complex inner(const ModelVec& a, const ModelVec& b);

/// Symmetric operator obtained from the isometry V = W^m restricted to
/// D = {x : x_0 = ... = x_{m-1} = 0} by the inverse Cayley transform:
/// dom S = (I - V) D, S (I - V) h = i (I + V) h.  Densely defined and
/// closed with deficiency indices (m, m):
///   N_i  = span{e_0, ..., e_{m-1}},   N_{-i} = span{e_m, ..., e_{2m-1}},
/// and for general nonreal lambda the deficiency vectors are geometric
/// tails of ratio (lambda + i)/(lambda - i) along each residue class
/// mod m (decaying downward for Im lambda > 0, upward for Im lambda < 0).
class ShiftModel {
public:
  explicit ShiftModel(Index m);

  Index m() const { return m_; }

  /// Is h an admissible Cayley-domain representative: finitely supported
  /// (no tails) and zero on the hole indices 0..m-1.
  bool in_cayley_domain(const EvGeoSeq& h, double tol = 0.0) const;

  /// h -> (f, Sf) with f = (I - W^m) h, Sf = i (I + W^m) h.
  std::pair<EvGeoSeq, EvGeoSeq> apply(const EvGeoSeq& h) const;

  /// Orthonormal basis of N_lambda(S) (Im lambda != 0); exact tails.
  std::vector<EvGeoSeq> defect_basis(Complex lambda) const;

  /// Coefficients of (S - lambda)(I - V)^{-1} = (i - lambda) I +
  /// (i + lambda) W^m acting on Cayley representatives.
  std::pair<Complex, Complex> range_symbol(Complex lambda) const;

  /// Solve (S - lambda) f = g for the Cayley representative h of f.
  /// Returns the solution certificate of the underlying affine solve; on
  /// membership the solution h additionally must lie in D, otherwise g
  /// was outside the range.
  AffineSolveResult resolve(Complex lambda, const EvGeoSeq& g) const;

  /// Random finitely supported Cayley-domain vector supported in
  /// [-span, span] (holes respected).
  EvGeoSeq random_domain(std::mt19937_64& rng, Index span = 8) const;

private:
  Index m_;
};

/// The base operator restricted to { f in dom S : <f, u_j> = 0 }.
/// Its domain closure is the orthogonal complement of span{u_j}, so the
/// restriction is a closed symmetric operator that is non-densely
/// defined with L = span{u_j} of dimension p.
class RestrictedModel {
public:
  RestrictedModel(ShiftModel base, std::vector<EvGeoSeq> u_list,
                  const TolerancePolicy& tol = {});

  const ShiftModel& base() const { return base_; }
  Index p() const { return static_cast<Index>(u_.size()); }
  const std::vector<EvGeoSeq>& u_list() const { return u_; }
  /// Orthonormalized basis of L = span{u_j}.
  const std::vector<EvGeoSeq>& L_basis() const { return u_on_; }

  bool in_domain(const EvGeoSeq& h, double tol = 1e-9) const;
  std::pair<EvGeoSeq, EvGeoSeq> apply(const EvGeoSeq& h) const;

  /// Orthogonal projection onto H_0 = (span u)^perp.
  EvGeoSeq project_H0(const EvGeoSeq& x) const;

  /// h -> (f, P_{H0} S' f): the compressed operator S_0 = P_{H0} S'.
  std::pair<EvGeoSeq, EvGeoSeq> compress_apply(const EvGeoSeq& h) const;

  /// Orthonormal basis of N_lambda(S') = N_lambda(S) + span{w_j}; the
  /// first m vectors are the base tails, the rest come from the weak
  /// solve (B^H B) g_j = P_D (I - W^{-m}) u_j via the three-term
  /// recurrence, w_j = B g_j.
  std::vector<EvGeoSeq> defect_basis(Complex lambda,
                                     const TolerancePolicy& tol = {}) const;

  /// The raw (non-orthonormalized) extra defect vectors w_j at lambda.
  std::vector<EvGeoSeq> extra_defect_raw(Complex lambda,
                                         const TolerancePolicy& tol = {}) const;

  EvGeoSeq random_domain(std::mt19937_64& rng, Index span = 10) const;

private:
  ShiftModel base_;
  std::vector<EvGeoSeq> u_;
  std::vector<EvGeoSeq> u_on_;
  std::vector<EvGeoSeq> constraint_;  // c_j = P_D (I - W^{-m}) u_j, orthonormal
};

/// Exit-space model: the same base operator viewed in H + C^{m1}.  The
/// domain closure is H + {0}, the lateral space L equals the exit space
/// H_1, and L_lambda = H_1 with V_lambda the identity for every lambda.
class ExitModel {
public:
  ExitModel(ShiftModel base, Index m1);

  const ShiftModel& base() const { return base_; }
  Index m1() const { return m1_; }

  std::pair<ModelVec, ModelVec> apply(const EvGeoSeq& h) const;
  /// Basis of N_lambda = N_lambda(base) + H_1.
  std::vector<ModelVec> defect_basis(Complex lambda) const;

private:
  ShiftModel base_;
  Index m1_;
};

/// Deficiency-structure bundle at lambda = +-i, in fixed orthonormal
/// bases of N_i and N_{-i}.  Coordinate matrices express the lateral
/// subspaces L_{+-i} and the semi-deficiency complements N'_{+-i} inside
/// those bases; V_i is the matrix of the isometry L_i -> L_{-i} induced
/// by h |-> projections of h in L.
struct DefectData {
  Index n_plus = 0, n_minus = 0;
  Index np_plus = 0, np_minus = 0;
  Index p = 0;

  std::vector<ModelVec> basis_Ni, basis_Nmi;
  std::vector<ModelVec> basis_L;

  Matrix basis_Li;    // n_plus  x dim L_i, orthonormal columns
  Matrix basis_Lmi;   // n_minus x dim L_{-i}
  Matrix basis_Nip;   // n_plus  x np_plus
  Matrix basis_Nmip;  // n_minus x np_minus
  Matrix V_i;          // dim L_{-i} x dim L_i

  /// Coordinates of a model vector in the N_i (sign > 0) or N_{-i}
  /// (sign < 0) basis.
  Vector defect_coords(const ModelVec& x, int sign) const;
  /// The model vector with given coordinates.
  ModelVec from_coords(const Vector& c, int sign) const;
};

DefectData defect_data(const ShiftModel& model);
DefectData defect_data(const RestrictedModel& model,
                       const TolerancePolicy& tol = {});
DefectData defect_data(const ExitModel& model);

} // namespace extcalc
