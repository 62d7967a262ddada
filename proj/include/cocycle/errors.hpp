#pragma once

#include <stdexcept>
#include <string>

namespace cocycle {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input matrix is singular, non-finite, or has non-positive determinant.
struct SingularInput : Error {
  using Error::Error;
};

/// Matrix fails the symmetric-positive-definite checks.
struct NotSPD : Error {
  using Error::Error;
};

/// Determinant renormalization requires a positive determinant.
struct NonPositiveDeterminant : Error {
  using Error::Error;
};

/// A path in a rotation group is sampled too coarsely for continuous lifting.
struct SamplingTooCoarse : Error {
  using Error::Error;
};

/// Loop concatenation requires matching endpoints.
struct EndpointMismatch : Error {
  using Error::Error;
};

/// The loop is not nullhomotopic, so no homotopy from the identity exists.
struct NotNullhomotopic : Error {
  using Error::Error;
};

/// No admissible stereographic projection pole was found on the sphere net.
struct NoProjectionPoint : Error {
  using Error::Error;
};

/// Generator trace correction exceeded its bound; the homotopy derivative
/// is inconsistent with the homotopy values.
struct TraceDriftTooLarge : Error {
  using Error::Error;
};

/// Requested integration time is not a multiple of the integrator step.
struct StepNotDividing : Error {
  using Error::Error;
};

/// A nonzero vector was required.
struct ZeroVector : Error {
  using Error::Error;
};

/// Top stretch rates are too close to resolve invariant directions.
struct DegenerateSpectrum : Error {
  using Error::Error;
};

/// Invalid construction parameter or run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace cocycle
