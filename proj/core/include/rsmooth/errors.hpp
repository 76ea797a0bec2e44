#pragma once

#include <stdexcept>
#include <string>

namespace rsmooth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must lie on the manifold does not.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its valid range (smoothing parameter, ordering, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A retraction step could not be carried out (rank-deficient X + eta).
class DegenerateStepError : public Error {
 public:
  using Error::Error;
};

/// The linear map is not surjective, so the corrected point is undefined.
class SurjectivityError : public Error {
 public:
  using Error::Error;
};

/// Solver configuration that cannot be resolved (e.g. theory stepsizes with rho = 0).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Stored instance data does not match its recorded hash or metadata.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace rsmooth
