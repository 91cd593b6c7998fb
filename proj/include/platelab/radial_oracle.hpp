#pragma once

#include <optional>
#include <vector>

#include "platelab/optimizer.hpp"

namespace platelab {

/// Radial reduction on a disk or annulus: nodes r_j on a uniform grid, u and
/// v = -Laplace u given at the unknown nodes (the centre is an unknown for
/// the disk, both radii carry zero Dirichlet data for the annulus).
struct RadialResult {
  double theta = 0.0;
  std::vector<double> r;
  std::vector<double> weights;  ///< 2 pi r dr cell measures (pi dr^2 / 4 at the centre)
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> rho;
  double t = 0.0;
  std::optional<std::size_t> fractional;
  SolveReport report;
};

/// Discrete measure sum(weights) of the radial grid; the admissible mass
/// bracket is [h, H] times this.
double radial_measure(const DomainSpec& spec, int n_r);

/// Same alternating scheme as optimize on the radial problem
/// -(1/r)(r u')' = v, -(1/r)(r v')' = Theta rho u. Only disk and annulus
/// domains are accepted; n_r >= 64 is the number of radial intervals.
RadialResult radial_optimize(const DomainSpec& spec, double h, double H, double M, int n_r,
                             const OptimizeOptions& opts = {});

}  // namespace platelab
