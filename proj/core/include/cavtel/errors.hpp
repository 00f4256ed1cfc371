#pragma once

#include <stdexcept>
#include <string>

namespace cavtel {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operator/state dimensions do not match the declared basis.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Parameters fall in the overdamped regime 2*delta <= kappa where the
/// damped Rabi frequency is not real.
class OverdampedError : public Error {
 public:
  using Error::Error;
};

/// A model precondition is violated (e.g. the Raman model needs Omega == g).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The damping factor cannot be compensated at the given detection time.
class InfeasibleCompensationError : public Error {
 public:
  using Error::Error;
};

/// A state with (numerically) zero norm was passed where a physical state
/// is required.
class ZeroNormError : public Error {
 public:
  using Error::Error;
};

/// Conditional evolution drove the norm below representable range.
class NormUnderflowError : public Error {
 public:
  using Error::Error;
};

/// A 1-d search could not bracket its root or maximum.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (CLI flags, config file, campaign setup).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cavtel
