#include "platelab/plate.hpp"

namespace platelab {

NavierSolution solve_navier(const DiscreteLaplacian& a, const ScalarField& f, double rel_tol,
                            const NavierSolution* guess) {
  NavierSolution out;
  out.v = solve_dirichlet(a, f, rel_tol, guess != nullptr ? &guess->v : nullptr);
  out.u = solve_dirichlet(a, out.v, rel_tol, guess != nullptr ? &guess->u : nullptr);
  return out;
}

}  // namespace platelab
