#include "extcalc/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace extcalc {

namespace {

constexpr double kMergeTol = 1e-13;  // rho closeness for merging duplicate modes
constexpr double kPruneRel = 5e-16;  // relative prune threshold in canonical form
constexpr double kUnitTol  = 1e-12;  // distance from the unit circle treated as on it

Complex ipow(Complex base, Index e) {
  Complex r{1.0, 0.0};
  Complex b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

bool mode_covers(const GeoMode& m, Index k) {
  const Index d = (m.side == Side::upper) ? k - m.start : m.start - k;
  return d >= 0 && d % m.stride == 0;
}

Complex mode_value(const GeoMode& m, Index k) {
  const Index j = (m.side == Side::upper) ? (k - m.start) / m.stride
                                          : (m.start - k) / m.stride;
  return m.coeff * ipow(m.rho, j);
}

// Extended gcd: returns g and x, y with m*x + n*y = g.
Index ext_gcd(Index m, Index n, Index& x, Index& y) {
  if (n == 0) {
    x = 1;
    y = 0;
    return m;
  }
  Index x1, y1;
  const Index g = ext_gcd(n, m % n, x1, y1);
  x = y1;
  y = x1 - (m / n) * y1;
  return g;
}

Index floor_mod(Index a, Index m) { return ((a % m) + m) % m; }

// Common lattice of k = a (mod m) and k = b (mod n): returns {k0, M} with
// M = lcm(m, n) and k0 the smallest nonnegative representative, or nullopt.
std::optional<std::pair<Index, Index>> lattice_meet(Index a, Index m, Index b,
                                                    Index n) {
  Index x, y;
  const Index g = ext_gcd(m, n, x, y);
  if (floor_mod(b - a, g) != 0) return std::nullopt;
  const Index M = m / g * n;
  // a + m * t = b (mod n)  =>  t = ((b-a)/g) * x (mod n/g)
  const Index t = floor_mod((b - a) / g % (n / g) * floor_mod(x, n / g), n / g);
  const Index k0 = floor_mod(a + m * t, M);
  return std::make_pair(k0, M);
}

std::optional<Index> first_common_at_least(Index a, Index m, Index b, Index n,
                                           Index K) {
  const auto lat = lattice_meet(a, m, b, n);
  if (!lat) return std::nullopt;
  const auto [k0, M] = *lat;
  // smallest k >= K with k = k0 (mod M)
  return K + floor_mod(k0 - K, M);
}

bool near_unit(Complex q) { return std::abs(std::abs(q) - 1.0) <= kUnitTol; }

} // namespace

EvGeoSeq EvGeoSeq::unit(Index k, bool one_sided) {
  EvGeoSeq s(one_sided);
  s.add_entry(k, Complex{1.0, 0.0});
  return s;
}

EvGeoSeq EvGeoSeq::from_entries(const std::vector<std::pair<Index, Complex>>& kv,
                                bool one_sided) {
  EvGeoSeq s(one_sided);
  for (const auto& [k, v] : kv) s.add_entry(k, v);
  return s;
}

Complex EvGeoSeq::value_at(Index k) const {
  Complex v{0.0, 0.0};
  const auto it = entries_.find(k);
  if (it != entries_.end()) v += it->second;
  for (const auto& m : modes_)
    if (mode_covers(m, k)) v += mode_value(m, k);
  return v;
}

std::pair<Index, Index> EvGeoSeq::window() const {
  if (entries_.empty()) return {0, -1};
  return {entries_.begin()->first, entries_.rbegin()->first};
}

void EvGeoSeq::set_entry(Index k, Complex v) {
  if (one_sided_ && k < 0)
    throw PreconditionViolated("EvGeoSeq: one-sided sequence cannot have entries below 0");
  // Fold the pieces of any mode that covers k so the explicit value wins.
  for (auto& m : modes_) {
    if (!mode_covers(m, k)) continue;
    // Absorb the mode's entries between its anchor and k into explicit form.
    while (mode_covers(m, k)) {
      entries_[m.start] += m.coeff;
      m.coeff *= m.rho;
      m.start += (m.side == Side::upper) ? m.stride : -m.stride;
      if ((m.side == Side::upper && m.start > k) ||
          (m.side == Side::lower && m.start < k))
        break;
    }
  }
  entries_[k] = v;
  canonicalize();
}

void EvGeoSeq::add_entry(Index k, Complex v) {
  if (one_sided_ && k < 0)
    throw PreconditionViolated("EvGeoSeq: one-sided sequence cannot have entries below 0");
  entries_[k] += v;
  canonicalize();
}

void EvGeoSeq::add_mode(GeoMode m) {
  if (m.stride < 1) throw DimensionMismatch("GeoMode: stride must be >= 1");
  if (std::abs(m.rho) >= 1.0)
    throw PreconditionViolated("GeoMode: |rho| must be < 1 for square summability");
  if (one_sided_ && (m.side == Side::lower || m.start < 0))
    throw PreconditionViolated("EvGeoSeq: one-sided sequence admits upper modes at start >= 0 only");
  if (m.coeff == Complex{0.0, 0.0}) return;
  if (std::abs(m.rho) == 0.0) {  // collapses to a single entry
    add_entry(m.start, m.coeff);
    return;
  }
  modes_.push_back(m);
  canonicalize();
}

void EvGeoSeq::canonicalize() {
  for (auto it = entries_.begin(); it != entries_.end();)
    it = (it->second == Complex{0.0, 0.0}) ? entries_.erase(it) : std::next(it);

  bool changed = true;
  while (changed) {
    changed = false;
    auto [lo, hi] = window();
    const bool have_window = !entries_.empty();

    // Fold mode heads that fall inside the window.
    if (have_window) {
      for (auto& m : modes_) {
        if (m.side == Side::upper) {
          while (m.start <= hi) {
            entries_[m.start] += m.coeff;
            m.coeff *= m.rho;
            m.start += m.stride;
            changed = true;
          }
        } else {
          while (m.start >= lo) {
            entries_[m.start] += m.coeff;
            m.coeff *= m.rho;
            m.start -= m.stride;
            changed = true;
          }
        }
      }
    }

    // Merge modes that live on the same lattice with the same ratio.
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      for (std::size_t j = i + 1; j < modes_.size(); ++j) {
        GeoMode& a = modes_[i];
        GeoMode& b = modes_[j];
        if (a.side != b.side || a.stride != b.stride) continue;
        if (floor_mod(a.start, a.stride) != floor_mod(b.start, b.stride)) continue;
        if (std::abs(a.rho - b.rho) > kMergeTol * std::max(1.0, std::abs(a.rho)))
          continue;
        // Re-anchor both at the outermost anchor, folding skipped values.
        const bool up = (a.side == Side::upper);
        const Index target = up ? std::max(a.start, b.start)
                                : std::min(a.start, b.start);
        for (GeoMode* m : {&a, &b}) {
          while ((up && m->start < target) || (!up && m->start > target)) {
            entries_[m->start] += m->coeff;
            m->coeff *= m->rho;
            m->start += up ? m->stride : -m->stride;
          }
        }
        a.coeff += b.coeff;
        b.coeff = Complex{0.0, 0.0};
        changed = true;
      }
    }
    std::erase_if(modes_, [](const GeoMode& m) {
      return m.coeff == Complex{0.0, 0.0};
    });
    for (auto it = entries_.begin(); it != entries_.end();)
      it = (it->second == Complex{0.0, 0.0}) ? entries_.erase(it) : std::next(it);
  }

  // Relative prune of roundoff dust.
  const double scale = sup_abs();
  if (scale > 0.0) prune(kPruneRel * scale);
}

void EvGeoSeq::prune(double abs_tol) {
  for (auto it = entries_.begin(); it != entries_.end();)
    it = (std::abs(it->second) <= abs_tol) ? entries_.erase(it) : std::next(it);
  std::erase_if(modes_, [abs_tol](const GeoMode& m) {
    return std::abs(m.coeff) <= abs_tol;
  });
}

double EvGeoSeq::sup_abs() const {
  double s = 0.0;
  for (const auto& [k, v] : entries_) s = std::max(s, std::abs(v));
  for (const auto& m : modes_) s = std::max(s, std::abs(m.coeff));
  return s;
}

bool EvGeoSeq::is_zero(double tol) const {
  return sup_abs() <= tol;
}

EvGeoSeq& EvGeoSeq::operator+=(const EvGeoSeq& other) {
  if (one_sided_ && !other.one_sided_) one_sided_ = false;
  for (const auto& [k, v] : other.entries_) entries_[k] += v;
  for (const auto& m : other.modes_) modes_.push_back(m);
  canonicalize();
  return *this;
}

EvGeoSeq& EvGeoSeq::operator-=(const EvGeoSeq& other) {
  EvGeoSeq neg = other;
  neg *= Complex{-1.0, 0.0};
  return (*this += neg);
}

EvGeoSeq& EvGeoSeq::operator*=(Complex c) {
  if (c == Complex{0.0, 0.0}) {
    entries_.clear();
    modes_.clear();
    return *this;
  }
  for (auto& [k, v] : entries_) v *= c;
  for (auto& m : modes_) m.coeff *= c;
  return *this;
}

EvGeoSeq operator+(EvGeoSeq a, const EvGeoSeq& b) { return a += b; }
EvGeoSeq operator-(EvGeoSeq a, const EvGeoSeq& b) { return a -= b; }
EvGeoSeq operator*(Complex c, EvGeoSeq a) { return a *= c; }

EvGeoSeq EvGeoSeq::shifted(Index s) const {
  EvGeoSeq out(one_sided_);
  if (one_sided_ && s < 0) {
    // Verify nothing falls below zero, then shift.
    auto [lo, hi] = window();
    if (!entries_.empty() && lo + s < 0)
      throw PreconditionViolated("EvGeoSeq: shift would move one-sided support below 0");
    for (const auto& m : modes_)
      if (m.start + s < 0)
        throw PreconditionViolated("EvGeoSeq: shift would move one-sided support below 0");
  }
  for (const auto& [k, v] : entries_) out.entries_[k + s] = v;
  for (auto m : modes_) {
    m.start += s;
    out.modes_.push_back(m);
  }
  out.canonicalize();
  return out;
}

EvGeoSeq EvGeoSeq::backshift_truncate(Index s) const {
  if (!one_sided_)
    throw PreconditionViolated("backshift_truncate: sequence must be one-sided");
  if (s < 0) throw DimensionMismatch("backshift_truncate: s must be >= 0");
  EvGeoSeq out(true);
  for (const auto& [k, v] : entries_)
    if (k - s >= 0) out.entries_[k - s] = v;
  for (auto m : modes_) {
    m.start -= s;
    while (m.start < 0) {
      m.coeff *= m.rho;
      m.start += m.stride;
    }
    out.modes_.push_back(m);
  }
  out.canonicalize();
  return out;
}

std::vector<Complex> EvGeoSeq::to_dense(Index lo, Index hi) const {
  std::vector<Complex> v;
  for (Index k = lo; k <= hi; ++k) v.push_back(value_at(k));
  return v;
}

namespace {

// Closed-form sum over the overlap of two modes (mu from x, nu from y,
// conjugating nu): sum over common indices of mu(k) * conj(nu(k)).
Complex mode_mode_inner(const GeoMode& mu, const GeoMode& nu) {
  const bool mu_up = (mu.side == Side::upper);
  const bool nu_up = (nu.side == Side::upper);

  if (mu_up == nu_up) {
    // Infinite overlap in one direction.
    const Index K = mu_up ? std::max(mu.start, nu.start)
                          : std::min(mu.start, nu.start);
    std::optional<Index> k0;
    if (mu_up) {
      k0 = first_common_at_least(mu.start, mu.stride, nu.start, nu.stride, K);
      if (k0 && (*k0 - mu.start < 0 || *k0 - nu.start < 0)) k0.reset();
    } else {
      // Mirror: work with negated indices.
      const auto r = first_common_at_least(-mu.start, mu.stride, -nu.start,
                                           nu.stride, -K);
      if (r) k0 = -*r;
    }
    if (!k0) return {0.0, 0.0};
    const Index M = std::lcm(mu.stride, nu.stride);
    const Complex r =
        ipow(mu.rho, M / mu.stride) * std::conj(ipow(nu.rho, M / nu.stride));
    const Complex a0 = mode_value(mu, *k0) * std::conj(mode_value(nu, *k0));
    return a0 / (Complex{1.0, 0.0} - r);
  }

  // Opposite directions: finite overlap between the two anchors.
  const GeoMode& up = mu_up ? mu : nu;
  const GeoMode& dn = mu_up ? nu : mu;
  if (up.start > dn.start) return {0.0, 0.0};
  const auto k0 =
      first_common_at_least(up.start, up.stride, dn.start, dn.stride, up.start);
  if (!k0 || *k0 > dn.start) return {0.0, 0.0};
  const Index M = std::lcm(up.stride, dn.stride);
  const Index T = (dn.start - *k0) / M;  // overlap has T+1 points
  const Index k1 = *k0 + T * M;
  // Per-step factor of the product along the overlap.
  const Complex r_up = ipow(up.rho, M / up.stride);
  const Complex r_dn = ipow(dn.rho, M / dn.stride);  // decreasing exponent
  auto term = [&](Index k) {
    return mode_value(mu, k) * std::conj(mode_value(nu, k));
  };
  // Product ratio stepping k -> k + M along the overlap.
  const Complex step = mu_up ? r_up / std::conj(r_dn) : std::conj(r_up) / r_dn;
  if (T == 0) return term(*k0);
  if (std::abs(step - Complex{1.0, 0.0}) <= 1e-8) {
    // Closed form loses digits near step = 1; the overlap is finite, so
    // sum directly (a0 * sum of step^j, evaluated incrementally).
    Complex sum{0.0, 0.0}, pw{1.0, 0.0};
    for (Index j = 0; j <= T; ++j) {
      sum += pw;
      pw *= step;
    }
    return term(*k0) * sum;
  }
  if (std::abs(step) <= 1.0) {
    const Complex a0 = term(*k0);
    return a0 * (Complex{1.0, 0.0} - ipow(step, T + 1)) /
           (Complex{1.0, 0.0} - step);
  }
  const Complex inv = Complex{1.0, 0.0} / step;
  const Complex aT = term(k1);
  return aT * (Complex{1.0, 0.0} - ipow(inv, T + 1)) / (Complex{1.0, 0.0} - inv);
}

} // namespace

Complex inner(const EvGeoSeq& x, const EvGeoSeq& y) {
  Complex total{0.0, 0.0};
  for (const auto& [k, v] : x.entries()) total += v * std::conj(y.value_at(k));
  for (const auto& m : x.modes())
    for (const auto& [k, w] : y.entries())
      if (mode_covers(m, k)) total += mode_value(m, k) * std::conj(w);
  for (const auto& mu : x.modes())
    for (const auto& nu : y.modes()) total += mode_mode_inner(mu, nu);
  return total;
}

double EvGeoSeq::norm() const {
  const Complex n2 = inner(*this, *this);
  return std::sqrt(std::max(0.0, n2.real()));
}

// ---------------------------------------------------------------------------
// Resolvent-type solves.
// ---------------------------------------------------------------------------

namespace {

AffineSolveResult member(EvGeoSeq x) {
  AffineSolveResult r;
  r.cert.kind = SeqCertificate::Kind::member;
  r.solution = std::move(x);
  return r;
}

AffineSolveResult non_member(Complex witness, std::string note) {
  AffineSolveResult r;
  r.cert.kind = SeqCertificate::Kind::non_member;
  r.cert.witness_ratio = witness;
  r.cert.note = std::move(note);
  return r;
}

void check_mode_strides(const EvGeoSeq& rhs, Index stride) {
  for (const auto& m : rhs.modes())
    if (m.stride != stride)
      throw CriticalRoot("solve_affine_shift: rhs mode stride differs from the solve stride");
}

// Per-residue-class constants C_c = sum_t q^{-t} rhs(c + t*stride); the
// forced solution of (alpha I + beta W_s) x = rhs grows like C_c q^{t}
// along class c, so x is square summable iff every C_c vanishes
// (|q| >= 1).  Closed form over entries and modes.
std::vector<Complex> tail_constants(const EvGeoSeq& rhs, Complex q,
                                    Index stride) {
  std::vector<Complex> C(static_cast<std::size_t>(stride), Complex{0.0, 0.0});
  const Complex qinv = Complex{1.0, 0.0} / q;
  auto qpow = [&](Index t) { return t >= 0 ? ipow(qinv, t) : ipow(q, -t); };
  for (const auto& [k, c] : rhs.entries()) {
    const Index cls = floor_mod(k, stride);
    C[static_cast<std::size_t>(cls)] += qpow((k - cls) / stride) * c;
  }
  for (const auto& m : rhs.modes()) {
    const Index cls = floor_mod(m.start, stride);
    const Complex head = qpow((m.start - cls) / stride) * m.coeff;
    // Upper: sum_j (rho/q)^j; lower: sum_j (rho*q)^j -- |rho*q| < 1 needs
    // |q| <= 1/|rho|, true for |q| = 1.
    const Complex ratio = (m.side == Side::upper) ? m.rho * qinv : m.rho * q;
    C[static_cast<std::size_t>(cls)] += head / (Complex{1.0, 0.0} - ratio);
  }
  return C;
}

// Upward Neumann branch: x = (1/alpha) sum_j q^j W_s^j rhs with q = -beta/alpha.
EvGeoSeq affine_upward(Complex alpha, Complex q, const EvGeoSeq& rhs,
                       Index stride) {
  EvGeoSeq x(rhs.one_sided());
  const Complex inv_a = Complex{1.0, 0.0} / alpha;
  for (const auto& [k, c] : rhs.entries())
    x.add_mode({Side::upper, k, stride, q, c * inv_a});
  for (const auto& m : rhs.modes()) {
    if (m.side == Side::upper) {
      if (std::abs(m.rho - q) <= kMergeTol * std::max(1.0, std::abs(q)))
        throw CriticalRoot("solve_affine_shift: resonance between rhs tail and solve ratio");
      const Complex d = inv_a / (m.rho - q);
      x.add_mode({Side::upper, m.start, stride, m.rho, m.coeff * m.rho * d});
      x.add_mode({Side::upper, m.start, stride, q, -m.coeff * q * d});
    } else {
      const Complex d = inv_a / (Complex{1.0, 0.0} - q * m.rho);
      x.add_mode({Side::lower, m.start, stride, m.rho, m.coeff * d});
      x.add_mode({Side::upper, m.start + stride, stride, q, m.coeff * q * d});
    }
  }
  return x;
}

// Downward branch: x = (1/beta) sum_j p^j W_s^{-(j+1)} rhs with p = -alpha/beta.
EvGeoSeq affine_downward(Complex beta, Complex p, const EvGeoSeq& rhs,
                         Index stride) {
  EvGeoSeq x(false);
  const Complex inv_b = Complex{1.0, 0.0} / beta;
  for (const auto& [k, c] : rhs.entries())
    x.add_mode({Side::lower, k - stride, stride, p, c * inv_b});
  for (const auto& m : rhs.modes()) {
    if (m.side == Side::lower) {
      if (std::abs(m.rho - p) <= kMergeTol * std::max(1.0, std::abs(p)))
        throw CriticalRoot("solve_affine_shift: resonance between rhs tail and solve ratio");
      const Complex d = inv_b / (m.rho - p);
      x.add_mode({Side::lower, m.start - stride, stride, m.rho, m.coeff * m.rho * d});
      x.add_mode({Side::lower, m.start - stride, stride, p, -m.coeff * p * d});
    } else {
      const Complex d = inv_b / (Complex{1.0, 0.0} - p * m.rho);
      x.add_mode({Side::upper, m.start, stride, m.rho, m.coeff * m.rho * d});
      x.add_mode({Side::lower, m.start - stride, stride, p, m.coeff * d});
    }
  }
  return x;
}

} // namespace

AffineSolveResult solve_affine_shift(Complex alpha, Complex beta,
                                     const EvGeoSeq& rhs, Index stride) {
  if (stride < 1) throw DimensionMismatch("solve_affine_shift: stride must be >= 1");
  if (alpha == Complex{0.0, 0.0} && beta == Complex{0.0, 0.0})
    throw DegenerateSymbol("solve_affine_shift: alpha = beta = 0");
  check_mode_strides(rhs, stride);

  if (beta == Complex{0.0, 0.0}) {
    EvGeoSeq x = rhs;
    x *= Complex{1.0, 0.0} / alpha;
    return member(std::move(x));
  }
  if (alpha == Complex{0.0, 0.0}) {
    if (rhs.one_sided()) {
      for (Index k = 0; k < stride; ++k)
        if (std::abs(rhs.value_at(k)) > 0)
          return non_member(Complex{1.0, 0.0},
                            "rhs has support below the range of the shift");
      EvGeoSeq x = rhs.backshift_truncate(stride);
      x *= Complex{1.0, 0.0} / beta;
      return member(std::move(x));
    }
    EvGeoSeq x = rhs.shifted(-stride);
    x *= Complex{1.0, 0.0} / beta;
    return member(std::move(x));
  }

  const Complex q = -beta / alpha;
  const double scale = std::max(rhs.sup_abs(), 1e-30);

  if (std::abs(q) < 1.0 && !near_unit(q))
    return member(affine_upward(alpha, q, rhs, stride));

  if (!rhs.one_sided() && !near_unit(q))
    return member(affine_downward(beta, -alpha / beta, rhs, stride));

  // From here on the forced solution grows like C_c q^t along residue
  // class c unless the tail constant C_c vanishes.
  const std::vector<Complex> C = tail_constants(rhs, q, stride);
  for (const auto& c : C)
    if (std::abs(c) > 1e-12 * scale)
      return non_member(q, "forced solution has a non-decaying tail");

  if (!near_unit(q)) {
    // One-sided, |q| > 1, all tail constants vanish: the bilateral downward
    // solution is supported in [0, inf).
    EvGeoSeq x = affine_downward(beta, -alpha / beta, rhs, stride);
    EvGeoSeq trimmed(true);
    for (const auto& [k, v] : x.entries())
      if (k >= 0)
        trimmed.add_entry(k, v);
      else if (std::abs(v) > 1e-10 * scale)
        throw PreconditionViolated("solve_affine_shift: one-sided trim lost mass");
    for (auto m : x.modes()) {
      if (m.side == Side::upper) {
        trimmed.add_mode(m);
        continue;
      }
      // Lower tails must sit entirely below zero up to roundoff.
      Index k = m.start;
      Complex coeff = m.coeff;
      while (k >= 0) {
        if (std::abs(coeff) > 1e-10 * scale)
          trimmed.add_entry(k, coeff);
        coeff *= m.rho;
        k -= m.stride;
      }
    }
    return member(std::move(trimmed));
  }

  // Unit-circle symbol with vanishing tail constants: forward substitution
  // terminates within the window.  Geometric rhs tails would need the
  // full partial-fraction machinery at a critical ratio, which leaves the
  // representation class.
  if (!rhs.modes().empty())
    throw CriticalRoot("solve_affine_shift: unit-circle symbol with tailed rhs");
  EvGeoSeq x(rhs.one_sided());
  if (rhs.entries().empty()) return member(std::move(x));
  const auto [lo, hi] = rhs.window();
  std::map<Index, Complex> vals;
  auto prior = [&](Index k) {
    const auto it = vals.find(k);
    return it == vals.end() ? Complex{0.0, 0.0} : it->second;
  };
  const Index first = rhs.one_sided() ? Index{0} : lo;
  for (Index k = first; k <= hi; ++k) {
    const Complex v = (rhs.value_at(k) - beta * prior(k - stride)) / alpha;
    if (std::abs(v) > 0.0) vals[k] = v;
  }
  for (Index k = hi - stride + 1; k <= hi; ++k)
    if (std::abs(prior(k)) > 1e-10 * scale)
      throw PreconditionViolated("solve_affine_shift: substitution failed to settle");
  for (const auto& [k, v] : vals)
    if (std::abs(v) > 1e-12 * scale) x.add_entry(k, v);
  return member(std::move(x));
}

AffineSolveResult solve_affine_backshift(Complex alpha, Complex beta,
                                         const EvGeoSeq& rhs, Index stride) {
  if (stride < 1)
    throw DimensionMismatch("solve_affine_backshift: stride must be >= 1");
  if (!rhs.one_sided())
    throw PreconditionViolated("solve_affine_backshift: rhs must be one-sided");
  if (alpha == Complex{0.0, 0.0})
    throw DegenerateSymbol("solve_affine_backshift: alpha = 0");
  check_mode_strides(rhs, stride);
  if (std::abs(beta) > std::abs(alpha) * (1.0 + kUnitTol))
    throw PreconditionViolated("solve_affine_backshift: needs |beta| <= |alpha|");

  // x_k = (1/alpha) sum_t w^t rhs_{k + t*stride} with w = -beta/alpha.
  const Complex w = -beta / alpha;
  const Complex inv_a = Complex{1.0, 0.0} / alpha;
  EvGeoSeq x(true);
  for (const auto& [k, c] : rhs.entries()) {
    Complex coeff = c * inv_a;
    for (Index p = k; p >= 0; p -= stride) {
      x.add_entry(p, coeff);
      coeff *= w;
    }
  }
  for (const auto& m : rhs.modes()) {
    const Complex d = inv_a / (Complex{1.0, 0.0} - w * m.rho);
    x.add_mode({Side::upper, m.start, stride, m.rho, m.coeff * d});
    Complex coeff = m.coeff * d * w;
    for (Index p = m.start - stride; p >= 0; p -= stride) {
      x.add_entry(p, coeff);
      coeff *= w;
    }
  }
  return member(std::move(x));
}

SeqCertificate kernel_certificate_shift(Complex alpha, Complex beta) {
  if (alpha == Complex{0.0, 0.0} && beta == Complex{0.0, 0.0})
    throw DegenerateSymbol("kernel_certificate_shift: zero symbol");
  SeqCertificate c;
  if (alpha == Complex{0.0, 0.0}) {
    // beta W_s is injective on l2(N).
    c.kind = SeqCertificate::Kind::trivial_kernel;
    c.note = "pure shift is injective";
    return c;
  }
  c.kind = SeqCertificate::Kind::trivial_kernel;
  c.witness_ratio = -beta / alpha;  // forced homogeneous ratio, never realized
  c.note = "forward substitution from index 0 forces the zero sequence";
  return c;
}

SeqCertificate kernel_certificate_backshift(Complex alpha, Complex beta) {
  if (alpha == Complex{0.0, 0.0} && beta == Complex{0.0, 0.0})
    throw DegenerateSymbol("kernel_certificate_backshift: zero symbol");
  SeqCertificate c;
  if (beta == Complex{0.0, 0.0}) {
    c.kind = SeqCertificate::Kind::trivial_kernel;
    c.note = "diagonal symbol";
    return c;
  }
  const Complex ratio = -alpha / beta;
  c.witness_ratio = ratio;
  if (std::abs(ratio) < 1.0) {
    c.kind = SeqCertificate::Kind::nontrivial_kernel;
    c.note = "geometric eigen-sequence with this ratio is square summable";
  } else {
    c.kind = SeqCertificate::Kind::trivial_kernel;
    c.note = "homogeneous solutions are geometric with non-decaying ratio";
  }
  return c;
}

// ---------------------------------------------------------------------------
// Three-term recurrence with holes.
// ---------------------------------------------------------------------------

EvGeoSeq second_order_residual(Complex c_minus, Complex c_zero, Complex c_plus,
                               const EvGeoSeq& x, const EvGeoSeq& rhs,
                               Index stride) {
  EvGeoSeq r = c_minus * x.shifted(stride);
  r += c_zero * x;
  r += c_plus * x.shifted(-stride);
  r -= rhs;
  return r;
}

EvGeoSeq solve_second_order(Complex c_minus, Complex c_zero, Complex c_plus,
                            const EvGeoSeq& rhs, const std::set<Index>& holes,
                            Index stride, const TolerancePolicy& tol) {
  if (stride < 1)
    throw DimensionMismatch("solve_second_order: stride must be >= 1");
  if (rhs.one_sided())
    throw PreconditionViolated("solve_second_order: bilateral sequences only");
  check_mode_strides(rhs, stride);

  // Purely diagonal case.
  if (c_plus == Complex{0.0, 0.0} && c_minus == Complex{0.0, 0.0}) {
    if (c_zero == Complex{0.0, 0.0})
      throw DegenerateSymbol("solve_second_order: zero symbol");
    EvGeoSeq x = rhs;
    x *= Complex{1.0, 0.0} / c_zero;
    for (Index h : holes) x.set_entry(h, Complex{0.0, 0.0});
    return x;
  }

  // Characteristic multipliers per upward step: roots of c_plus t^2 +
  // c_zero t + c_minus = 0.
  std::vector<Complex> roots;
  if (c_plus != Complex{0.0, 0.0}) {
    const Complex disc = std::sqrt(c_zero * c_zero - 4.0 * c_plus * c_minus);
    roots.push_back((-c_zero + disc) / (2.0 * c_plus));
    roots.push_back((-c_zero - disc) / (2.0 * c_plus));
    if (std::abs(roots[0] - roots[1]) <=
        kMergeTol * std::max(1.0, std::abs(roots[0])))
      throw CriticalRoot("solve_second_order: double characteristic root");
  } else {
    if (c_zero == Complex{0.0, 0.0})
      throw DegenerateSymbol("solve_second_order: degenerate first-order symbol");
    roots.push_back(-c_minus / c_zero);
  }
  for (const Complex& r : roots)
    if (near_unit(r))
      throw CriticalRoot("solve_second_order: characteristic root on the unit circle");

  std::optional<Complex> root_in;   // |r| < 1: admissible upper tail
  std::optional<Complex> root_out;  // |r| > 1: admissible lower tail
  for (const Complex& r : roots) {
    if (std::abs(r) < 1.0 && std::abs(r) > 0.0) {
      if (root_in)
        throw PreconditionViolated("solve_second_order: two decaying upward directions");
      root_in = r;
    }
    if (std::abs(r) > 1.0) {
      if (root_out)
        throw PreconditionViolated("solve_second_order: two decaying downward directions");
      root_out = r;
    }
  }

  // Particular solution for the rhs tails.
  EvGeoSeq particular = EvGeoSeq::zero(false);
  EvGeoSeq core = rhs;  // rhs minus what the particular tails account for
  for (const auto& m : rhs.modes()) {
    const Complex denom = (m.side == Side::upper)
                              ? c_minus / m.rho + c_zero + c_plus * m.rho
                              : c_minus * m.rho + c_zero + c_plus / m.rho;
    if (std::abs(denom) <= 1e-12 * (std::abs(c_zero) + std::abs(c_plus) +
                                    std::abs(c_minus)))
      throw CriticalRoot("solve_second_order: rhs tail resonates with the recurrence");
    particular.add_mode({m.side, m.start, m.stride, m.rho, m.coeff / denom});
  }

  // Window covering rhs entries, rhs mode anchors, and holes, padded by 2s.
  Index wlo = 0, whi = -1;
  bool any = false;
  auto extend = [&](Index k) {
    if (!any) {
      wlo = whi = k;
      any = true;
    } else {
      wlo = std::min(wlo, k);
      whi = std::max(whi, k);
    }
  };
  for (const auto& [k, v] : rhs.entries()) extend(k);
  for (const auto& m : rhs.modes()) extend(m.start);
  for (Index h : holes) extend(h);
  if (!any) extend(0);
  wlo -= 2 * stride;
  whi += 2 * stride;

  const Index n_window = whi - wlo + 1;
  const Index n_tails = 2 * stride;  // upper + lower coefficient per class
  const Index n_unknown = n_window + n_tails;

  auto upper_anchor = [&](Index cls) {
    Index a = whi + 1;
    while (floor_mod(a, stride) != cls) ++a;
    return a;
  };
  auto lower_anchor = [&](Index cls) {
    Index a = wlo - 1;
    while (floor_mod(a, stride) != cls) --a;
    return a;
  };

  // Value of the ansatz at position k, as a row of coefficients over the
  // unknowns, plus the known particular contribution.
  auto add_position = [&](Eigen::RowVectorXcd& row, Complex& known, Index k,
                          Complex weight) {
    if (weight == Complex{0.0, 0.0}) return;
    known += weight * particular.value_at(k);
    if (k >= wlo && k <= whi) {
      row(k - wlo) += weight;
      return;
    }
    const Index cls = floor_mod(k, stride);
    if (k > whi) {
      if (!root_in) return;  // no admissible upper tail: ansatz is 0 there
      const Index a = upper_anchor(cls);
      row(n_window + cls) += weight * ipow(*root_in, (k - a) / stride);
    } else {
      if (!root_out) return;
      const Index a = lower_anchor(cls);
      row(n_window + stride + cls) +=
          weight * ipow(Complex{1.0, 0.0} / *root_out, (a - k) / stride);
    }
  };

  std::vector<Eigen::RowVectorXcd> rows;
  std::vector<Complex> rhs_vals;
  for (Index k = wlo - stride; k <= whi + stride; ++k) {
    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(n_unknown);
    Complex known{0.0, 0.0};
    if (holes.count(k)) {
      // Constraint x_k = 0.
      add_position(row, known, k, Complex{1.0, 0.0});
      rows.push_back(row);
      rhs_vals.push_back(-known);
      continue;
    }
    add_position(row, known, k - stride, c_minus);
    add_position(row, known, k, c_zero);
    add_position(row, known, k + stride, c_plus);
    rows.push_back(row);
    rhs_vals.push_back(core.value_at(k) - known);
  }

  Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows.size()), n_unknown);
  Eigen::VectorXcd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) = rows[i];
    b(static_cast<Eigen::Index>(i)) = rhs_vals[i];
  }

  // Missing tails leave zero columns; strip them to keep the rank check honest.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (A.col(j).norm() > 0) live.push_back(j);
  Eigen::MatrixXcd Alive(A.rows(), static_cast<Eigen::Index>(live.size()));
  for (std::size_t j = 0; j < live.size(); ++j) Alive.col(j) = A.col(live[j]);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Alive, Eigen::ComputeThinU |
                                                    Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = tol.rank_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  if (rank < Alive.cols())
    throw PreconditionViolated("solve_second_order: recurrence with these holes is not uniquely solvable");
  const Eigen::VectorXcd sol_live = svd.solve(b);
  const double resid = (Alive * sol_live - b).norm();
  const double scale = std::max(1.0, b.norm());
  if (resid > 1e-9 * scale)
    throw PreconditionViolated("solve_second_order: recurrence system is inconsistent");

  Eigen::VectorXcd sol = Eigen::VectorXcd::Zero(n_unknown);
  for (std::size_t j = 0; j < live.size(); ++j) sol(live[j]) = sol_live(j);

  EvGeoSeq x = particular;
  for (Index k = wlo; k <= whi; ++k) {
    const Complex v = sol(k - wlo);
    if (std::abs(v) > 1e-14 * std::max(1.0, sol.norm())) x.add_entry(k, v);
  }
  for (Index cls = 0; cls < stride; ++cls) {
    if (root_in) {
      const Complex c = sol(n_window + cls);
      if (std::abs(c) > 1e-14 * std::max(1.0, sol.norm()))
        x.add_mode({Side::upper, upper_anchor(cls), stride, *root_in, c});
    }
    if (root_out) {
      const Complex c = sol(n_window + stride + cls);
      if (std::abs(c) > 1e-14 * std::max(1.0, sol.norm()))
        x.add_mode({Side::lower, lower_anchor(cls), stride,
                    Complex{1.0, 0.0} / *root_out, c});
    }
  }
  return x;
}

} // namespace extcalc
