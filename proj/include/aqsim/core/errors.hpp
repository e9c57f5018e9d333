#pragma once

#include <stdexcept>
#include <string>

namespace aqsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated (non-hermitian H, unnormalized state, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Input arguments are malformed or out of range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A size guard (basis dimension, superoperator size, enumeration limit) was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions or bases do not match.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Configuration or input-file problem; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A physics guard tripped (non-convergence, CFL, step resolution); CLI exit code 1.
class PhysicsGuardError : public Error {
 public:
  using Error::Error;
};

namespace detail {
template <class E = InvalidArgument>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}
}  // namespace detail

}  // namespace aqsim
