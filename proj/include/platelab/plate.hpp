#pragma once

#include "platelab/poisson.hpp"

namespace platelab {

/// Deflection u and v = -Laplace(u) of a hinged plate.
struct NavierSolution {
  ScalarField u;
  ScalarField v;
};

/// Solves Laplace^2 u = f with u = Laplace(u) = 0 on the boundary as the
/// chained pair A v = f, A u = v. `guess` seeds the Krylov path.
NavierSolution solve_navier(const DiscreteLaplacian& a, const ScalarField& f, double rel_tol = default_linear_tol,
                            const NavierSolution* guess = nullptr);

}  // namespace platelab
