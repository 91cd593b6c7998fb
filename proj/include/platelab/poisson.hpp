#pragma once

#include <memory>

#include <Eigen/SparseCore>

#include "platelab/field.hpp"
#include "platelab/geometry.hpp"

namespace platelab {

inline constexpr double default_linear_tol = 1e-10;

enum class LinearSolver {
  automatic,  ///< sparse LU up to 1e6 nodes; beyond that CG when symmetric, LU otherwise
  krylov,     ///< CG when symmetric, BiCGSTAB otherwise (Jacobi preconditioned)
  direct,     ///< cached sparse LU with iterative refinement
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class DiscreteLaplacian;

/// Five-point stencil; at a node with cut fractions theta_E, theta_W the
/// x-part is (2/delta^2)[u_P/(tE tW) - u_E/(tE(tE+tW)) - u_W/(tW(tE+tW))]
/// with zero boundary values, likewise in y. Asserts the M-matrix sign and
/// diagonal-dominance pattern row by row (std::logic_error on violation).
DiscreteLaplacian assemble_laplacian(const Grid& grid, LinearSolver solver = LinearSolver::automatic);

/// Solves A w = f with ||A w - f||_2 <= rel_tol ||f||_2. Throws SolverError
/// carrying the achieved relative residual when the iteration cap
/// 20 sqrt(n) + 1000 is exhausted.
ScalarField solve_dirichlet(const DiscreteLaplacian& a, const ScalarField& f, double rel_tol = default_linear_tol,
                            const ScalarField* initial_guess = nullptr);

ScalarField apply_laplacian(const DiscreteLaplacian& a, const ScalarField& w);

/// Shortley-Weller discretization of -Laplace with homogeneous Dirichlet data
/// on the interior nodes of one grid.
class DiscreteLaplacian {
public:
  const SparseMatrix& matrix() const { return matrix_; }
  GridTag tag() const { return tag_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
  /// True when some link is cut (theta < 1); the operator is then not symmetric.
  bool has_cut_links() const { return has_cut_links_; }
  bool symmetric() const { return !has_cut_links_; }
  LinearSolver solver() const { return solver_; }

private:
  friend DiscreteLaplacian assemble_laplacian(const Grid& grid, LinearSolver solver);
  friend ScalarField solve_dirichlet(const DiscreteLaplacian&, const ScalarField&, double, const ScalarField*);

  struct Cache;

  SparseMatrix matrix_;
  GridTag tag_ = 0;
  bool has_cut_links_ = false;
  LinearSolver solver_ = LinearSolver::automatic;
  std::shared_ptr<Cache> cache_;
};

}  // namespace platelab
