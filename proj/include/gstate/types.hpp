#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gstate {

/// Grid-vector: one value per interior radial node.
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: parameter outside its admissible range, shape mismatch, malformed artifact.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A linearization is singular or too ill-conditioned to be trusted.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace gstate
