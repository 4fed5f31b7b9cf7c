#pragma once

#include <vector>

#include "extcalc/matkit.hpp"
#include "extcalc/seqspace.hpp"

namespace extcalc {

/// Contraction Y on an (abstractly infinite-dimensional) lateral space,
/// given in structured form so the range facts the extension machinery
/// needs can be certified exactly by sequence-level witnesses instead of
/// numeric rank thresholds.  Building blocks: the unilateral shift, its
/// adjoint, finite unitaries without fixed vectors, and direct sums.
///
/// Every catalog kind has at least one of its defect operators equal to
/// zero, so P_{D_Y} Y^H restricted to D_{Y^H} vanishes for all entries.
/// The defect operators of the shift blocks are rank-one projections per
/// copy; restricted to their ranges they act as the identity, which is
/// what lets the block formulas below stay finite matrices.
struct StructuredY {
  enum class Kind { forward_shift, backward_shift, finite_unitary, direct_sum };

  /// Facts certified at construction.  The Omega spaces are the range
  /// intersections ran(I - Y) \cap ran D_{Y^H} (and the adjoint mirror);
  /// triviality is decided by sequence certificates, never by tolerance.
  struct Facts {
    bool ker_id_minus_y_trivial = false;
    bool omega_y_trivial = false;
    bool omega_ystar_trivial = false;
    Index dim_dy = 0;       // dim of the defect space of Y
    Index dim_dystar = 0;   // dim of the defect space of Y^H
    std::vector<SeqCertificate> certificates;
  };

  Kind kind = Kind::finite_unitary;
  Index multiplicity = 1;          // number of shift copies (shift kinds)
  Matrix finite_block;             // finite_unitary kind only
  std::vector<StructuredY> parts;  // direct_sum kind only
  Facts facts;
};

/// Y = unilateral forward shift (multiplicity copies).  D_Y = 0,
/// D_{Y^H} = projection onto the first unit vector of each copy;
/// e_0 lies outside ran(I - Y) with tail witness ratio 1.
StructuredY forward_shift_y(Index multiplicity = 1);

/// Y = adjoint of the unilateral shift.  D_{Y^H} = 0, D_Y = projection
/// onto the first unit vector of each copy.
StructuredY backward_shift_y(Index multiplicity = 1);

/// Finite unitary block; requires ker(I - W) = {0} at rank_tol scale
/// (throws DegenerateU otherwise, NotUnitary if W is not unitary).
/// Both defects vanish, so the Omega facts are trivially exact.
StructuredY finite_unitary_y(const Matrix& W, const TolerancePolicy& tol = {});

/// Orthogonal direct sum; facts combine componentwise (the intersections
/// distribute over orthogonal summands).
StructuredY direct_sum_y(std::vector<StructuredY> parts);

/// Smallest catalog operator with the prescribed defect dimensions,
/// trivial ker(I - Y) and exactly trivial Omega intersections:
/// forward copies supply dim D_{Y^H}, backward copies supply dim D_Y,
/// and a fixed-point-free finite unitary (-1) covers the (0, 0) case.
StructuredY catalog_y(Index want_dim_dy, Index want_dim_dystar);

/// Decides whether the defect-coordinate vector c (coefficients against
/// the orthonormal basis of the D_{Y^H} space) lies in ran(I - Y).
/// For every catalog entry the answer is: member iff c = 0 (each basis
/// direction is a unit vector of a shift copy certified outside the
/// range).  The numeric zero test is absolute: max_k |c_k| <= zero_tol.
SeqCertificate membership_in_ran_id_minus_y(const StructuredY& y,
                                            const Vector& c,
                                            double zero_tol = 1e-10);

/// Mirror test against ran(I - Y^H) for vectors of the D_Y space.
SeqCertificate membership_in_ran_id_minus_ystar(const StructuredY& y,
                                                const Vector& c,
                                                double zero_tol = 1e-10);

/// Extension parameter over a structured lateral space: the lateral
/// block is the structured Y, the remaining blocks are finite matrices
/// in the defect coordinates,
///   M : N'_i -> D_{Y^H}   (dim_dystar x np_plus),
///   G : D_Y  -> N'_{-i}   (np_minus x dim_dy),
///   X : D_M  -> D_{G^H}   (np_minus x np_plus, supported on the defect
///                          subspaces of M and G^H).
/// The assembled operator is [[Y V_i, D_{Y^H} M], [G D_Y V_i, -G Y^H M +
/// D_{G^H} X D_M]]; only the compression-relevant finite data is stored.
struct StructuredParam {
  StructuredY y;
  Matrix M;
  Matrix G;
  Matrix X;
  Index np_plus = 0;
  Index np_minus = 0;
};

/// Shape and contraction checks for a structured parameter; throws
/// DimensionMismatch / NotAContraction.
void validate(const StructuredParam& param, const TolerancePolicy& tol = {});

} // namespace extcalc
