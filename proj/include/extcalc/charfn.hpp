#pragma once

#include <vector>

#include "extcalc/extenders.hpp"
#include "extcalc/matkit.hpp"
#include "extcalc/symop.hpp"

namespace extcalc {

/// One evaluation of the characteristic function C_lambda(z) of a model
/// operator: the contraction N_lambda -> N_lambdabar whose graph shift
/// encodes the z-extension, expressed in the model's orthonormal
/// deficiency bases.  lambda and z both lie in the open upper half-plane.
struct CharFnSample {
  Complex lambda;
  Complex z;
  Matrix matrix;  // n x n, coordinates B_lambda -> B_lambdabar
  enum class Route { via_Nz, via_cayley } route = Route::via_Nz;
  double norm = 0.0;
  /// |(z - lambda)/(z - lambdabar)| - ||matrix||; never below -eq_tol.
  double bound_slack = 0.0;
  /// Condition number of the deficiency Gram system behind the sample.
  double condition = 1.0;
  /// Set when the Gram system is worse than 1/rank_tol but still solvable.
  bool flagged = false;
};

/// Projection-ratio route: C = xi * [P_{N_lambdabar} Phi_z][P_{N_lambda}
/// Phi_z]^{-1} over the exact deficiency bases, xi = (z-lambda)/
/// (z-lambdabar).  Pure Gram arithmetic, no resolvents.  Throws
/// DegenerateProjection when P_{N_lambda} restricted to N_z loses rank.
CharFnSample charfn_via_Nz(const Model& model, Complex lambda, Complex z,
                           const TolerancePolicy& tol = {});

/// Resolvent route: solves (I - xi Y_lambda^*) x = phi for each basis
/// vector of N_lambda inside the sequence class, where Y_lambda^* is the
/// Cayley transform (at lambda) of the z-extension taken at lambdabar;
/// the solve reduces to one certified resolvent at z per basis vector.
/// Then C phi = xi P_{N_lambdabar} x.
CharFnSample charfn_via_cayley(const Model& model, Complex lambda, Complex z,
                               const TolerancePolicy& tol = {});

struct CharFnGridPoint {
  CharFnSample nz;
  CharFnSample cayley;
  double discrepancy = 0.0;
};

struct CharFnGrid {
  Complex lambda;
  std::vector<CharFnGridPoint> samples;
  double max_discrepancy = 0.0;
  double min_bound_slack = 0.0;
};

/// Lattice {x + iy : x in {-1,0,1}, y in {0.5,1,2,5}} plus the imaginary
/// ray 10^k i up to 10^6: generic points for the identities and a
/// non-tangential approach to infinity for the boundary check.
std::vector<Complex> default_grid();

/// Both routes at every grid point, with discrepancy and bound-slack
/// statistics.
CharFnGrid charfn_grid(const Model& model, Complex lambda,
                       const std::vector<Complex>& zs,
                       const TolerancePolicy& tol = {});

/// Orthonormal frames of one deficiency space N_mu: the model-vector
/// basis, plus coordinate bases of the lateral part L_mu = P_{N_mu} L
/// and of its complement N'_mu inside N_mu.
struct DeficiencyFrame {
  std::vector<ModelVec> basis;
  Matrix lateral;  // n x dim(L_mu)
  Matrix reduced;  // n x (n - dim(L_mu))
};

DeficiencyFrame deficiency_frame(const Model& model, Complex mu,
                                 const TolerancePolicy& tol = {});

/// Matrix of the lateral isometry V_mu : L_mu -> L_mubar (the map
/// P_{N_mu} h -> P_{N_mubar} h on h in L), in the orthonormal lateral
/// frames at mu and mubar.
Matrix lateral_isometry(const Model& model, Complex mu,
                        const TolerancePolicy& tol = {});

/// Deviation table ||C_lambda(it) restricted to L_lambda - V_lambda||
/// along the imaginary ray; the deviation must shrink towards the
/// boundary limit of the characteristic function.
struct BoundaryTable {
  std::vector<double> t;
  std::vector<double> deviation;
  bool nonincreasing = false;
};

BoundaryTable boundary_limit_check(const RestrictedModel& model, Complex lambda,
                                   const std::vector<double>& t_list,
                                   const TolerancePolicy& tol = {});

/// Block data of C_lambda(z) in the L_lambda + N'_lambda splitting, its
/// Schur complement with pivot shift V_lambda, and the characteristic
/// function of the compressed operator computed independently inside the
/// domain closure.  residual = ||schur - compressed||; factor_residual
/// is the triangular block factorization identity of the shifted matrix.
struct SchurRelationReport {
  Matrix A11, A12, A21, A22;
  Matrix V;
  Matrix schur;
  Matrix compressed;
  double residual = 0.0;
  double factor_residual = 0.0;
};

SchurRelationReport schur_relation_check(const RestrictedModel& model,
                                         Complex lambda, Complex z,
                                         const TolerancePolicy& tol = {});

/// ||C_lambda(z) - C'_i((z-a)/b)|| for lambda = a + ib, where C' belongs
/// to the rescaled operator (S - a)/b and is evaluated through the
/// resolvent route of the rescaled model.  Checks the rescaling
/// covariance of the whole pipeline.
double rescaling_residual(const Model& model, Complex lambda, Complex z,
                          const TolerancePolicy& tol = {});

/// ||(I - Y_z^* Y_z) h - P_{N_z} h||: the defect of the Cayley partial
/// isometry of the z-extension acts as the deficiency projection.
double cayley_defect_residual(const Model& model, Complex z, const ModelVec& h,
                              const TolerancePolicy& tol = {});

/// ||(I - Y_z) h - P_{N_zbar} h|| for h orthogonal to the domain
/// closure: the lateral fixed-point identity, exact in the model class.
double lateral_cayley_residual(const Model& model, Complex z, const ModelVec& h,
                               const TolerancePolicy& tol = {});

} // namespace extcalc
