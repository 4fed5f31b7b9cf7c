#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extcalc/matkit.hpp"

namespace extcalc {

using Index = std::int64_t;

/// One geometric tail of a sequence.
///
/// side == upper: entries at start, start+stride, start+2*stride, ...
/// side == lower: entries at start, start-stride, start-2*stride, ...
/// The j-th entry (counting outward from the anchor) has value
/// coeff * rho^j with |rho| < 1, so every mode is square summable.
enum class Side { upper, lower };

struct GeoMode {
  Side side;
  Index start;
  Index stride;
  Complex rho;
  Complex coeff;
};

/// A square-summable sequence over the integers consisting of finitely
/// many explicit entries plus finitely many geometric tails.  This class
/// is closed under linear combinations, translation, and the resolvent
/// solves used throughout the library, and inner products evaluate in
/// closed form (exact up to scalar roundoff).
///
/// Canonical form: explicit entries live inside the window [lo, hi]
/// (= the span of explicit keys); every upper mode anchors above hi and
/// every lower mode anchors below lo; modes on the same lattice with the
/// same rho are merged.
///
/// A sequence can be flagged one_sided, meaning it lives in l2(N):
/// support is contained in [0, inf) and lower modes are forbidden.
class EvGeoSeq {
public:
  EvGeoSeq() = default;
  explicit EvGeoSeq(bool one_sided) : one_sided_(one_sided) {}

  static EvGeoSeq zero(bool one_sided = false) { return EvGeoSeq(one_sided); }
  static EvGeoSeq unit(Index k, bool one_sided = false);
  static EvGeoSeq from_entries(const std::vector<std::pair<Index, Complex>>& kv,
                               bool one_sided = false);

  bool one_sided() const { return one_sided_; }

  Complex value_at(Index k) const;
  /// Overwrites the value at k (folding any mode that covers k first).
  void set_entry(Index k, Complex v);
  void add_entry(Index k, Complex v);
  void add_mode(GeoMode m);

  const std::map<Index, Complex>& entries() const { return entries_; }
  const std::vector<GeoMode>& modes() const { return modes_; }
  /// Window of explicit entries; {0, -1} when there are none.
  std::pair<Index, Index> window() const;

  EvGeoSeq& operator+=(const EvGeoSeq& other);
  EvGeoSeq& operator-=(const EvGeoSeq& other);
  EvGeoSeq& operator*=(Complex c);

  /// Translation x_k -> x_{k-s} (moves support up by s).  One-sided
  /// sequences may only be translated up; use backshift_truncate for the
  /// adjoint shift on l2(N).
  EvGeoSeq shifted(Index s) const;
  /// One-sided adjoint shift: drops entries moved below index 0.
  EvGeoSeq backshift_truncate(Index s) const;

  double sup_abs() const;
  bool is_zero(double tol = 0.0) const;
  void prune(double abs_tol);

  double norm() const;

  /// Dense slice of values (inclusive bounds), mostly for tests.
  std::vector<Complex> to_dense(Index lo, Index hi) const;

private:
  void canonicalize();

  std::map<Index, Complex> entries_;
  std::vector<GeoMode> modes_;
  bool one_sided_ = false;
};

EvGeoSeq operator+(EvGeoSeq a, const EvGeoSeq& b);
EvGeoSeq operator-(EvGeoSeq a, const EvGeoSeq& b);
EvGeoSeq operator*(Complex c, EvGeoSeq a);

/// Exact l2 pairing sum_k x_k * conj(y_k).
Complex inner(const EvGeoSeq& x, const EvGeoSeq& y);

/// Certificate attached to range-membership and kernel facts about
/// shift-type recurrences: the witness ratio is the tail ratio that
/// forces the formal solution out of l2 (non_member / trivial_kernel).
struct SeqCertificate {
  enum class Kind { member, non_member, trivial_kernel, nontrivial_kernel };
  Kind kind = Kind::member;
  Complex witness_ratio{0.0, 0.0};
  std::string note;
};

struct AffineSolveResult {
  std::optional<EvGeoSeq> solution;  // present iff cert.kind == member
  SeqCertificate cert;
};

/// Solves (alpha I + beta W_s) x = rhs in l2, where (W_s x)_k = x_{k-s}.
///
/// Bilateral case: solvable iff |alpha| != |beta| (otherwise the symbol
/// vanishes on the unit circle and a non_member certificate with the
/// critical ratio is returned for rhs != 0).
///
/// One-sided case (rhs.one_sided() required): x is determined by forward
/// substitution; when |beta/alpha| >= 1 the solution is square summable
/// iff the per-class tail constants vanish, and a non_member certificate
/// carrying the witness ratio is returned otherwise.
AffineSolveResult solve_affine_shift(Complex alpha, Complex beta,
                                     const EvGeoSeq& rhs, Index stride = 1);

/// Solves alpha x_k + beta x_{k+s} = rhs_k for all k >= 0 on l2(N)
/// (the adjoint-shift companion of the one-sided solve).  Requires
/// |alpha| >= |beta| for a unique bounded inverse.
AffineSolveResult solve_affine_backshift(Complex alpha, Complex beta,
                                         const EvGeoSeq& rhs, Index stride = 1);

/// Exact kernel of alpha I + beta W_s on l2(N) ((W_s x)_k = x_{k-s}):
/// forward substitution forces x = 0, so the kernel is always trivial
/// unless the symbol is identically zero.
SeqCertificate kernel_certificate_shift(Complex alpha, Complex beta);

/// Exact kernel of alpha x_k + beta x_{k+s} on l2(N): solutions are the
/// geometric sequences of ratio -alpha/beta per class, square summable
/// iff |alpha| < |beta|.  The certificate's witness carries that ratio.
SeqCertificate kernel_certificate_backshift(Complex alpha, Complex beta);

/// Unique l2 solution x of the three-term recurrence
///   c_minus x_{k-s} + c_zero x_k + c_plus x_{k+s} = rhs_k
/// imposed for every k outside `holes`, subject to x_k = 0 at the holes.
/// The recurrence must have no characteristic root on the unit circle
/// (CriticalRoot otherwise).  The returned sequence satisfies the system
/// exactly; residuals are verified symbolically by the caller via
/// second_order_residual.
EvGeoSeq solve_second_order(Complex c_minus, Complex c_zero, Complex c_plus,
                            const EvGeoSeq& rhs, const std::set<Index>& holes,
                            Index stride = 1, const TolerancePolicy& tol = {});

/// c_minus W_s x + c_zero x + c_plus W_s^{-1} x - rhs, as a sequence.
EvGeoSeq second_order_residual(Complex c_minus, Complex c_zero, Complex c_plus,
                               const EvGeoSeq& x, const EvGeoSeq& rhs,
                               Index stride = 1);

} // namespace extcalc
