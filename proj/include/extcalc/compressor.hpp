#pragma once

#include <set>
#include <string>
#include <vector>

#include "extcalc/extenders.hpp"
#include "extcalc/structured.hpp"

namespace extcalc {

/// 2x2 block coordinates of an extension parameter U : N_i -> N_{-i}
/// over the splittings L_i + N'_i and L_{-i} + N'_{-i}, together with
/// the factorization U = [[Y V_i, D_{Y*} M], [G D_Y V_i, -G Y* M +
/// D_{G*} X D_M]] recovered from the blocks.  The factor recovery uses
/// pseudoinverses of the defect operators; reassembly_residual records
/// how well the factored form reproduces U (an honesty check -- the
/// factorization exists for every contraction, so a large residual
/// means a numerical rank decision went wrong).
struct AdaptedBlocks {
  Matrix U11, U12, U21, U22;
  Matrix Y;   // lateral parameter on L_{-i} coordinates (Y V_i = U11)
  Matrix M;   // N'_i -> defect space of Y*
  Matrix G;   // defect space of Y -> N'_{-i}
  Matrix X;   // defect space of M -> defect space of G*
  double reassembly_residual = 0.0;
};

AdaptedBlocks adapted_blocks(const DefectData& dd, const Matrix& U,
                             const TolerancePolicy& tol = {});

/// Null spaces whose images under (I - U) make up the part of dom(T)
/// that falls back into H_0 = closure(dom S):
///   basis_Ni:  ker(P_{L_{-i}} U - V_i P_{L_i})   in N_i coordinates,
///   basis_Nmi: ker(P_{L_i} U^H - V_{-i} P_{L_{-i}}) in N_{-i} coordinates.
/// direct_condition_residual is the largest |<(I - U) phi, l_j>| over
/// the kernel basis and the lateral basis vectors l_j -- the coordinate
/// kernels recomputed against the model-level membership condition.
struct IntersectionKernel {
  Matrix basis_Ni;
  Matrix basis_Nmi;
  double direct_condition_residual = 0.0;
};

IntersectionKernel intersection_kernels(const DefectData& dd,
                                        const ExtensionParam& param,
                                        const TolerancePolicy& tol = {});

/// Labels for the compressed operator T_0 = P_{H_0} T |(dom T \cap H_0).
enum class Classification {
  equals_S0,
  symmetric,
  selfadjoint,
  dissipative,
  maximal_dissipative,
  dual_pair_adjoint,
};

std::string to_string(Classification c);

/// Parameters of the compression and of the adjoint-side compression,
/// in the fixed orthonormal coordinates of N'_i and N'_{-i}.  U0 holds
/// the action on the columns of dom_U0.basis() (one column per basis
/// vector); same for Ustar0 over dom_Ustar0.
struct CompressionReport {
  Subspace dom_U0;      // subspace of C^{np_plus}
  Matrix U0;            // np_minus x dim(dom_U0)
  Subspace dom_Ustar0;  // subspace of C^{np_minus}
  Matrix Ustar0;        // np_plus x dim(dom_Ustar0)
  std::set<Classification> classification;
  std::pair<Index, Index> deficiency_of_compression{0, 0};
  /// Residual of the route-internal consistency check: Schur complement
  /// vs lateral-factor formula in compress(), single-valuedness of the
  /// projected graph in compress_direct(), exactly zero for the
  /// certificate-backed structured route.
  double internal_residual = 0.0;
};

/// U0 composed with the orthogonal projection onto its domain, as a full
/// np_minus x np_plus matrix (zero on the domain's complement).  This is
/// the coordinate-free object two routes can be compared by.
Matrix action_on_Np(const Subspace& dom, const Matrix& action);

/// Largest deviation between two reports: domain projector differences
/// and action differences, both sides.
double compression_reports_agree(const CompressionReport& a,
                                 const CompressionReport& b);

/// Parameter-level compression: domain by the range-membership test
/// dom U0 = {phi' : D_{Y*} M phi' in ran(I - Y)} (least-squares residual
/// at eq_tol scale), action by the Schur complement of the adapted
/// blocks with pivot shift V_i, cross-checked internally against the
/// lateral-factor formula G[-Y* + D_Y (I - Y)^{-1} D_{Y*}]M + D_{G*} X D_M.
CompressionReport compress(const DefectData& dd, const ExtensionParam& param,
                           const TolerancePolicy& tol = {});

/// Vector-level compression: solves the membership conditions
/// <(I - U) phi, l_j> = 0 on N_i directly in the model, projects the
/// extension action onto H_0, and reports in the same coordinates as
/// compress().  Independent of the Schur route end to end.
CompressionReport compress_direct(const Model& model, const ExtensionOp& ext,
                                  const TolerancePolicy& tol = {});

/// Compression of a structured parameter: dom U0 = ker M exactly (the
/// membership test is decided by the catalog certificates), action
/// D_{G*} X restricted to ker M; mirror for the adjoint side.
CompressionReport compress_structured(const StructuredParam& param,
                                      const TolerancePolicy& tol = {});

/// Range-geometry predicates of a contraction Y: triviality of
/// ker(I - Y), the intersections Omega_Y = ran(I - Y) \cap ran D_{Y*}
/// and its adjoint mirror, the three-way join identity
/// ran D_{Y*} + ran(I - Y) = ran D_Y + ran(I - Y*) = ran(I - Y_R)^{1/2},
/// containment flags, and the norm identities that hold when the
/// membership premise is satisfied.  Residual fields are -1 when the
/// corresponding premise is vacuous.
struct RangePredicateReport {
  bool contraction = false;
  bool ker_id_minus_y_trivial = false;
  Subspace omega_y;
  Subspace omega_ystar;
  bool omega_y_trivial = false;
  bool omega_ystar_trivial = false;
  bool join_identity = false;
  double item3_residual = -1.0;       // (I-Y*)(I-Y)^{-1} maps Omega_Y onto Omega_{Y*}
  double item4_norm_residual = -1.0;  // | ||-Y*h + D_Y(I-Y)^{-1}D_{Y*}h|| - ||h|| |
  double item4_range_residual = -1.0; // D_Y(...) = (I-Y*)(I-Y)^{-1} D_{Y*} h
  bool ran_dy2_in_ran_idmystar = false;   // ran D_Y^2 inside ran(I - Y*)
  bool ran_idmy_in_ran_idmystar = false;  // ran(I - Y) inside ran(I - Y*)
  bool ran_dystar_in_ran_idmy = false;
  bool ran_idmy_eq_sqrt = false;      // ran(I - Y) = ran(I - Y_R)^{1/2}
  bool ran_dy_in_ran_idmystar = false;
  bool ran_idmystar_eq_sqrt = false;
  Index dim_dy = 0;
  Index dim_dystar = 0;
  std::vector<SeqCertificate> certificates;  // structured route only
};

RangePredicateReport range_predicates(const Matrix& Y,
                                      const TolerancePolicy& tol = {});

/// Structured route: the certified facts are copied into the report and
/// the numeric identity fields stay vacuous (-1); membership questions
/// are answered by sequence certificates.
RangePredicateReport range_predicates(const StructuredY& y,
                                      const TolerancePolicy& tol = {});

/// Both sides of the defect identity
///   ||phi||^2 - ||W phi||^2 = ||M phi||^2 - ||F M phi||^2
///     + ||D_X D_M phi||^2 + ||(D_K F M - K^H X D_M) phi||^2,
/// where W phi = K (F M phi) + D_{K^H} X D_M phi, evaluated on supplied
/// pairs (phi, F M phi); F itself is never materialized.  Returns the
/// largest |lhs - rhs|.  Throws PreconditionViolated when K, M, X are
/// not contractions or some ||F M phi|| exceeds ||M phi||.
double l1_identity_check(const Matrix& K,
                         const std::vector<std::pair<Vector, Vector>>& F_img_pairs,
                         const Matrix& M_op, const Matrix& X,
                         const TolerancePolicy& tol = {});

/// Assembly of the universal 2x2 contraction block form
///   [[A, D_{A*} M], [K D_A, -K A^H M + D_{K*} X D_M]]
/// from contractive ingredients with the range compatibilities
/// M into the defect space of A*, K from the defect space of A,
/// X from the defect space of M into the defect space of K*.
struct BlockParametrization {
  Matrix U;
  bool unitary = false;  // all four defect products vanish
};

BlockParametrization block_parametrize(const Matrix& A, const Matrix& M,
                                       const Matrix& K, const Matrix& X,
                                       const TolerancePolicy& tol = {});

} // namespace extcalc
