#include "platelab/poisson.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "platelab/error.hpp"

namespace platelab {

using Vector = Eigen::VectorXd;
using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct DiscreteLaplacian::Cache {
  std::once_flag lu_once;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool lu_ok = false;
};

namespace {

Eigen::Map<const Vector> as_eigen(const ScalarField& f) {
  return {f.values.data(), static_cast<Eigen::Index>(f.values.size())};
}

void check_mmatrix_row(const SparseMatrix& m, Eigen::Index row, bool boundary_adjacent) {
  double diag = 0.0;
  double off = 0.0;
  for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
    if (it.col() == row) {
      diag = it.value();
    } else {
      if (it.value() > 0.0) throw std::logic_error("laplacian: positive off-diagonal entry");
      off += -it.value();
    }
  }
  if (!(diag > 0.0)) throw std::logic_error("laplacian: non-positive diagonal");
  if (off > diag * (1.0 + 1e-12)) throw std::logic_error("laplacian: row is not diagonally dominant");
  if (boundary_adjacent && !(off < diag)) {
    throw std::logic_error("laplacian: boundary-adjacent row is not strictly diagonally dominant");
  }
}

double relative_residual(const SparseMatrix& a, const Vector& w, const Vector& f, double fnorm) {
  return (f - a * w).norm() / fnorm;
}

}  // namespace

DiscreteLaplacian assemble_laplacian(const Grid& grid, LinearSolver solver) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double inv_d2 = 1.0 / grid.cell_area();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid.size() * 5);

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& th = grid.cuts(k);
    double diag = 0.0;
    // Pairs (east, west) and (north, south).
    for (int pair = 0; pair < 2; ++pair) {
      const Neighbor plus = pair == 0 ? east : north;
      const Neighbor minus = pair == 0 ? west : south;
      const double tp = th[plus];
      const double tm = th[minus];
      diag += 2.0 * inv_d2 / (tp * tm);
      const int np = grid.neighbor(k, plus);
      const int nm = grid.neighbor(k, minus);
      if (np >= 0) trip.emplace_back(static_cast<int>(k), np, -2.0 * inv_d2 / (tp * (tp + tm)));
      if (nm >= 0) trip.emplace_back(static_cast<int>(k), nm, -2.0 * inv_d2 / (tm * (tp + tm)));
    }
    trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
  }

  DiscreteLaplacian a;
  a.matrix_.resize(n, n);
  a.matrix_.setFromTriplets(trip.begin(), trip.end());
  a.matrix_.makeCompressed();
  a.tag_ = grid.tag();
  a.has_cut_links_ = grid.has_cut_links();
  a.solver_ = solver;
  a.cache_ = std::make_shared<DiscreteLaplacian::Cache>();

  for (Eigen::Index r = 0; r < n; ++r) check_mmatrix_row(a.matrix_, r, grid.boundary_adjacent(static_cast<std::size_t>(r)));
  return a;
}

ScalarField apply_laplacian(const DiscreteLaplacian& a, const ScalarField& w) {
  if (w.tag != a.tag() || w.size() != a.size()) throw InvalidInput("apply_laplacian: field belongs to a different grid");
  ScalarField out(w.tag, std::vector<double>(w.size()));
  Eigen::Map<Vector>(out.values.data(), static_cast<Eigen::Index>(out.size())) = a.matrix() * as_eigen(w);
  return out;
}

ScalarField solve_dirichlet(const DiscreteLaplacian& a, const ScalarField& f, double rel_tol,
                            const ScalarField* initial_guess) {
  if (f.tag != a.tag() || f.size() != a.size()) throw InvalidInput("solve_dirichlet: field belongs to a different grid");
  if (!(rel_tol > 0.0 && rel_tol <= 1e-4)) throw InvalidInput("solve_dirichlet: rel_tol must lie in (0, 1e-4]");
  for (double x : f.values) {
    if (!std::isfinite(x)) throw InvalidInput("solve_dirichlet: non-finite right-hand side");
  }

  const auto n = static_cast<Eigen::Index>(a.size());
  const auto rhs = as_eigen(f);
  const double fnorm = rhs.norm();
  ScalarField out(f.tag, std::vector<double>(f.size(), 0.0));
  if (fnorm == 0.0) return out;
  Eigen::Map<Vector> w(out.values.data(), n);
  const auto& m = a.matrix();

  // The factorization is reused by every solve of an eigen iteration, which
  // beats CG at these sizes; Krylov takes over only for very large grids.
  constexpr std::size_t direct_limit = 1'000'000;
  const bool use_direct =
      a.solver() == LinearSolver::direct ||
      (a.solver() == LinearSolver::automatic && (!a.symmetric() || a.size() <= direct_limit));
  if (use_direct) {
    auto& cache = *a.cache_;
    std::call_once(cache.lu_once, [&] {
      ColMatrix col = m;
      cache.lu.compute(col);
      cache.lu_ok = cache.lu.info() == Eigen::Success;
    });
    if (!cache.lu_ok) throw SolverError("solve_dirichlet: sparse LU factorization failed", 1.0);
    w = cache.lu.solve(rhs);
    double res = relative_residual(m, w, rhs, fnorm);
    for (int refine = 0; refine < 5 && res > rel_tol; ++refine) {
      const Vector r = rhs - m * w;
      w += cache.lu.solve(r);
      res = relative_residual(m, w, rhs, fnorm);
    }
    if (res > rel_tol) {
      std::ostringstream msg;
      msg << "solve_dirichlet: direct solve reached relative residual " << res << " > " << rel_tol;
      throw SolverError(msg.str(), res);
    }
    return out;
  }

  const auto cap = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n)) + 1000.0);
  double res = 0.0;
  auto run = [&](auto& solver) {
    // The recursive residual drifts from the true one; aim below the target
    // and restart from the current iterate if the true residual disagrees.
    solver.setTolerance(0.5 * rel_tol);
    solver.setMaxIterations(cap);
    solver.compute(m);
    if (initial_guess != nullptr && initial_guess->tag == f.tag && initial_guess->size() == f.size()) {
      w = solver.solveWithGuess(rhs, as_eigen(*initial_guess));
    } else {
      w = solver.solve(rhs);
    }
    res = relative_residual(m, w, rhs, fnorm);
    for (int restart = 0; restart < 2 && res > rel_tol && solver.info() == Eigen::Success; ++restart) {
      const Vector start = w;
      w = solver.solveWithGuess(rhs, start);
      res = relative_residual(m, w, rhs, fnorm);
    }
  };
  if (a.symmetric()) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    run(cg);
  } else {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
    run(bicg);
  }
  // Judge convergence by the true residual.
  if (res > rel_tol) {
    std::ostringstream msg;
    msg << "solve_dirichlet: Krylov iteration stopped at relative residual " << res << " > " << rel_tol;
    throw SolverError(msg.str(), res);
  }
  return out;
}

}  // namespace platelab
