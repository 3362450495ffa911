#pragma once

#include <stdexcept>
#include <string>

namespace torpsi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters: grid invariants, symbol parameters, out-of-lattice points.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operands whose grid, channel count or lattice do not match.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A finite difference needs lattice values the symbol does not carry.
class MarginError : public Error {
 public:
  using Error::Error;
};

/// Too few usable dyadic shells for a log-log regression.
class ShellError : public Error {
 public:
  using Error::Error;
};

/// A Hermitian / positive operator was required and the input is not one.
class NotPositiveError : public Error {
 public:
  using Error::Error;
};

/// Time step outside the integrator's stability region, or blow-up detected.
class StabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace torpsi
