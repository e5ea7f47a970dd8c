#pragma once

#include <stdexcept>
#include <string>

namespace rtcurved {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of a mathematical function (e.g. a point off a surface).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied parameter (odd L, nonpositive nu, unknown degree...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Mesh generation or tagging produced something inconsistent.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// A local construction (basis, constraint system) is numerically degenerate.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A linear system could not be factorized.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// A solve finished but violated its residual contract.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Conjugate gradient met a direction with nonpositive curvature.
class SpdViolationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtcurved
