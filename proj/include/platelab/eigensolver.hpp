#pragma once

#include <vector>

#include "platelab/plate.hpp"
#include "platelab/rearrange.hpp"

namespace platelab {

struct EigenOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  /// Relative residual for each of the two Dirichlet solves per iteration.
  double linear_tol = 1e-12;
};

/// Principal eigenpair of Laplace^2 u = theta rho u with Navier conditions.
struct EigenResult {
  double theta = 0.0;
  ScalarField u;  ///< normalized so that sum(rho u^2) * delta^2 = 1
  ScalarField v;  ///< -Laplace(u)
  int iterations = 0;
  double last_increment = 0.0;
  std::vector<double> history;  ///< Rayleigh quotient after every iteration
};

/// Inverse power iteration u <- solve_navier(rho u) / norm, starting from
/// the constant 1 (or `start`, which must be positive). Stops when
/// |theta_{k+1} - theta_k| <= tol * theta_k; throws ConvergenceError with the
/// last theta when max_iter is exceeded.
EigenResult principal_pair(const DiscreteLaplacian& a, const DensityField& rho, const EigenOptions& opts = {},
                           const ScalarField* start = nullptr);

/// sum(v^2) / sum(rho u^2) over the interior nodes (node-sum quadrature).
double rayleigh_quotient(const ScalarField& u, const ScalarField& v, const DensityField& rho);

}  // namespace platelab
