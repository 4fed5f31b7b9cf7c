#pragma once

#include <stdexcept>
#include <string>

namespace extcalc {

/// Base class for all library errors.  Every throw site uses one of the
/// derived types below so callers can react to the precise failure mode.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix expected to be a contraction has a singular value above 1 + tol.
class NotAContraction : public Error {
public:
  using Error::Error;
};

/// A matrix expected to be unitary fails the unitarity residual test.
class NotUnitary : public Error {
public:
  using Error::Error;
};

/// Operand shapes are incompatible.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// A pivot block that must be invertible is rank deficient.
class SingularPivot : public Error {
public:
  using Error::Error;
};

/// A scalar recurrence symbol degenerates (both coefficients vanish).
class DegenerateSymbol : public Error {
public:
  using Error::Error;
};

/// A recurrence has a characteristic root on the unit circle, so the
/// solution leaves the closed sequence class handled by this library.
class CriticalRoot : public Error {
public:
  using Error::Error;
};

/// A vector that must lie in an operator domain does not.
class NotInDomain : public Error {
public:
  using Error::Error;
};

/// Restriction vectors fail the independence / closure preconditions.
class DegenerateU : public Error {
public:
  using Error::Error;
};

/// An extension parameter coincides with the forbidden isometry on a
/// nonzero vector, so it does not define an operator extension.
class Inadmissible : public Error {
public:
  using Error::Error;
};

/// A factor cannot be recovered because a range inclusion fails.
class RangeCompatibility : public Error {
public:
  using Error::Error;
};

/// A synthesis target violates its validity conditions.
class SpecViolation : public Error {
public:
  using Error::Error;
};

/// No catalog operator matches the requested defect dimensions.
class CatalogMiss : public Error {
public:
  using Error::Error;
};

/// A projected basis collapses (rank drop) where full rank is required.
class DegenerateProjection : public Error {
public:
  using Error::Error;
};

/// Generic precondition failure not covered by a more specific type.
class PreconditionViolated : public Error {
public:
  using Error::Error;
};

/// CLI: requested suite name is not registered.
class UnknownSuite : public Error {
public:
  using Error::Error;
};

} // namespace extcalc
