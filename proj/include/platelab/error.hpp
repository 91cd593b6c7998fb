#pragma once

#include <stdexcept>
#include <string>

namespace platelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Grid construction failure (resolution too coarse, disconnected interior).
class GridError : public Error {
public:
  using Error::Error;
};

/// Linear solver did not reach the requested residual.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double achieved_residual)
      : Error(what), achieved_residual_(achieved_residual) {}
  double achieved_residual() const { return achieved_residual_; }

private:
  double achieved_residual_;
};

/// Eigen iteration failed to converge; carries the last eigenvalue estimate.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double last_theta)
      : Error(what), last_theta_(last_theta) {}
  double last_theta() const { return last_theta_; }

private:
  double last_theta_;
};

}  // namespace platelab
