#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platelab/eigensolver.hpp"

namespace platelab {

struct OptimizeOptions {
  double theta_tol = 1e-8;
  int max_outer = 200;
  EigenOptions eigen;
  LinearSolver solver = LinearSolver::automatic;
  /// Number of independent starts; start 0 is the uniform density unless
  /// randomized_start is set, the others are always randomized.
  int restarts = 1;
  bool randomized_start = false;
  std::uint64_t seed = 0;
};

/// Converged (u, rho) realizing the best Theta found.
struct OptimalPair {
  std::shared_ptr<const Grid> grid;
  ScalarField u;
  ScalarField v;
  DensityField rho;
  double theta = 0.0;
  double t = 0.0;
  std::optional<std::size_t> fractional;

  const DomainSpec& domain() const { return grid->domain(); }
  GridTag tag() const { return grid->tag(); }
};

enum class Termination { theta_converged, rho_fixed, max_outer };
std::string to_string(Termination t);

/// A fixed point reached by one start.
struct FixedPoint {
  int restart = 0;
  double theta = 0.0;
  Termination termination = Termination::max_outer;
};

struct SolveReport {
  std::vector<double> theta_history;    ///< one entry per outer step, starting with the initial density
  std::vector<int> inner_iterations;    ///< eigen iterations per outer step
  std::vector<double> eigen_increments; ///< final |dTheta| of each eigen solve
  std::vector<double> mass_errors;      ///< |mass(rho) - M| per outer step
  double wall_time = 0.0;               ///< seconds, all restarts
  Termination termination = Termination::max_outer;
  int outer_iterations = 0;
  int best_restart = 0;
  /// Distinct fixed points over all restarts (Theta differing by > 1e-6 rel).
  std::vector<FixedPoint> fixed_points;
  /// The plate problem is solved as the second-order system (v = -Laplace u).
  std::string biharmonic_notion = "system";
};

struct OptimizeResult {
  OptimalPair pair;
  SolveReport report;
};

/// Alternating minimization: eigensolve at fixed rho, bathtub rearrangement
/// at fixed u, until Theta stalls (theta_tol) or rho repeats node for node.
/// The reported Theta is the best found; global optimality is not certified.
OptimizeResult optimize(const DomainSpec& spec, int nodes_per_side, double h, double H, double M,
                        const OptimizeOptions& opts = {});

/// Same on a prebuilt grid and operator (shared across calls).
OptimizeResult optimize(std::shared_ptr<const Grid> grid, const DiscreteLaplacian& a, double h, double H, double M,
                        const OptimizeOptions& opts = {});

/// Single alternating run from a given initial density.
OptimizeResult optimize_from(std::shared_ptr<const Grid> grid, const DiscreteLaplacian& a, const DensityField& initial,
                             const OptimizeOptions& opts);

/// Admissible random density: bathtub placement of a sum of random bumps.
DensityField random_density(const Grid& grid, double h, double H, double M, std::uint64_t seed);

}  // namespace platelab
