#pragma once

#include <optional>
#include <string>
#include <vector>

#include "extcalc/compressor.hpp"
#include "extcalc/structured.hpp"
#include "extcalc/symop.hpp"

namespace extcalc {

/// Target of the inverse problem: a dual pair of partial contractions on
/// the reduced defect coordinates.  `action` acts on the columns of
/// dom.basis() (one image column per basis vector, the same convention
/// as CompressionReport); `action_star` acts on dom_star.basis().
struct DualPairSpec {
  Subspace dom;        // subspace of C^{np_plus}
  Matrix action;       // np_minus x dim(dom)
  Subspace dom_star;   // subspace of C^{np_minus}
  Matrix action_star;  // np_plus x dim(dom_star)

  Index np_plus() const { return dom.ambient_dim(); }
  Index np_minus() const { return dom_star.ambient_dim(); }
};

/// The compression pair of a report, repackaged as a synthesis target.
DualPairSpec spec_from_report(const CompressionReport& rep);

/// Exact margins behind a valid dual-pair target.  strict_part_* is the
/// norm of the component of the action that leaves the other domain;
/// margin_* is the largest eps with
///   eps * Phi^H Phi <= I - action^H action
/// on the domain coordinates (clamped to 1e6, and set to 1e6 when the
/// strict part vanishes).  A positive margin is the conditional
/// strictness requirement in spectral form: directions on which the
/// action is isometric never leave the other domain, and every direction
/// that does leave has a quantified norm loss.
struct SpecMargins {
  double duality_residual = 0.0;
  double strict_part_forward = 0.0;
  double strict_part_reverse = 0.0;
  double margin_forward = 1.0;
  double margin_reverse = 1.0;
  /// Worst sampled violation of ||action x||^2 <= ||x||^2 -
  /// margin*||Phi x||^2 over seeded unit vectors (cross-check of the
  /// spectral margins; should sit at roundoff scale).
  double sampled_slack = 0.0;
};

/// Shape, contraction, duality and strictness validation of a target
/// pair.  Throws DimensionMismatch / NotAContraction / SpecViolation.
SpecMargins validate_spec(const DualPairSpec& spec,
                          const TolerancePolicy& tol = {});

/// Which of the four intersection-triviality statements of an exit-space
/// construction is certificate-backed.  The core side (H_0) is decided
/// by the coupling certificates plus the kernel dimensions of M and G*.
/// The exit side (H_1) is reported honestly: every catalog coupling has
/// a nonzero ker D_Y, and (I - Y) maps that kernel into exit-space
/// domain vectors, so exit-side triviality is never certified here;
/// notes name the obstruction.
struct ExitCertificates {
  bool core_domain_trivial = false;       // dom(ext)  meets H_0 in dom S only
  bool core_domain_star_trivial = false;  // dom(ext*) meets H_0 in dom S only
  bool exit_domain_trivial = false;       // dom(ext)  meets H_1 in {0} -- see notes
  bool exit_domain_star_trivial = false;
  std::vector<std::string> notes;
};

/// Output of a synthesis: the assembled structured parameter, the
/// compression it produces (round_trip), and how far that compression
/// deviates from the requested target (round_trip_residual, measured on
/// domain projectors and zero-extended actions, both sides).
struct SynthesisResult {
  StructuredParam param;
  CompressionReport round_trip;
  double round_trip_residual = 0.0;
  /// How well the contraction completion reproduced the prescribed
  /// column/row data (pseudo-inverse recovery can only fail when the
  /// target touches isometry; large values throw before returning).
  double completion_residual = 0.0;
  /// All four block defect products vanish and the coupling facts hold,
  /// i.e. the assembled (infinite) parameter is unitary.
  bool assembled_unitary = false;
  std::vector<std::string> trace;
  std::optional<ExitCertificates> exit;
};

/// Inverse problem with a symmetric target: `action` must be isometric
/// on `dom`.  Picks a catalog coupling with defect dimensions
/// (np_minus - dim dom, np_plus - dim dom), a coisometry M annihilating
/// exactly dom, an isometry G filling exactly the complement of the
/// target's range, and X equal to the target; the assembled parameter is
/// unitary and its compression reproduces the target.  Throws
/// SpecViolation when the action is not isometric on dom.
SynthesisResult synthesize_selfadjoint(const Subspace& dom, const Matrix& action,
                                       const TolerancePolicy& tol = {});
SynthesisResult synthesize_selfadjoint(const DefectData& dd, const Subspace& dom,
                                       const Matrix& action,
                                       const TolerancePolicy& tol = {});

/// Inverse problem with a dissipative dual-pair target.  Steps:
///  1. split each action into the part landing in the other domain and
///     the strict part that leaves it; polar-factor the strict parts and
///     compute the exact strictness margins;
///  2. pick the catalog coupling with defect dimensions
///     (np_minus - dim dom_star, np_plus - dim dom) and build M, G as
///     scaled coisometries annihilating exactly the target domains, the
///     scale set well inside the strictness margin so that step 3 stays
///     contractive;
///  3. complete the prescribed column (action over dom) and row (adjoint
///     action over dom_star) of X to a full contraction through the
///     universal 2x2 block form with the free parameter zero;
///  4. assemble, compress, and verify the round trip.
/// Note the scale in step 2: coupling the defects at the full strict-part
/// absolute value (so that the completion data contains a bare partial
/// isometry) generally breaks contractivity of X whenever the action
/// both feeds the other domain and leaks past it on the same vector; the
/// margin-scaled coisometry keeps the completion inside the ball.
SynthesisResult synthesize_dissipative(const DualPairSpec& spec,
                                       const TolerancePolicy& tol = {});
SynthesisResult synthesize_dissipative(const DefectData& dd,
                                       const DualPairSpec& spec,
                                       const TolerancePolicy& tol = {});

enum class ExitMode { selfadjoint, dissipative };

/// Extensions living in an enlarged space H = H_base (+) C^{m1} whose
/// domain (and, in dissipative mode, the adjoint's domain) meets the
/// core space exactly in dom S.  selfadjoint mode requires m1 == m and
/// couples through unitary M, G with X = 0; dissipative mode requires
/// m1 >= m and couples through kernel-free scaled embeddings.  The
/// certificate summary is in result.exit; see ExitCertificates for what
/// is and is not certified.  Throws CatalogMiss when m1 does not fit the
/// requested mode.
SynthesisResult exit_space_extensions(const ShiftModel& base, Index m1,
                                      ExitMode mode,
                                      const TolerancePolicy& tol = {});

} // namespace extcalc
