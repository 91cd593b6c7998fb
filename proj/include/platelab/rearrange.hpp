#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "platelab/field.hpp"

namespace platelab {

/// Admissible density: h <= rho_i <= H at every interior node and total mass
/// sum(rho_i * cell_area) = M.
struct DensityField {
  GridTag tag = 0;
  std::vector<double> values;
  double h = 1.0;
  double H = 1.0;
  double M = 0.0;
  double cell_area = 1.0;

  /// rho = M / |Omega|_delta everywhere.
  static DensityField uniform(const Grid& grid, double h, double H, double M);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }

  /// Throws InvalidInput unless the bounds hold exactly and the mass matches
  /// M to 1e-12 relative.
  void validate() const;
};

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> terms);

double mass(const DensityField& rho);

/// Throws InvalidInput unless 0 < h <= H and h |Omega| <= M <= H |Omega|
/// (1e-12 relative slack on the bracket).
void check_mass_bracket(double h, double H, double M, double measure);

struct ThresholdResult {
  DensityField rho;
  double t = 0.0;
  std::optional<std::size_t> fractional;
};

/// Bathtub placement on weighted cells: values of u sorted descending (ties
/// by ascending index) take H until the mass is used up, one cell takes the
/// balancing fractional value, the rest take h. t is the value of u at the
/// first cell after the full-H run (the minimum of u if every cell is H).
///
/// Cells whose u lies within tie_tolerance * max|u| of t count as tied with
/// the threshold cell; all of them share the balancing value, so rho does
/// not depend on round-off between mirror-image nodes. `fractional` is then
/// the lowest index of that plateau.
struct Placement {
  std::vector<double> rho;
  double t = 0.0;
  std::optional<std::size_t> fractional;
};
Placement bathtub_placement(std::span<const double> u, std::span<const double> weights, double h, double H,
                            double M, double tie_tolerance = 1e-10);

/// Density in the admissible class maximizing sum(rho u^2): the minimizer of
/// the Rayleigh quotient at fixed u. Requires u > 0.
ThresholdResult optimal_density(const ScalarField& u, double h, double H, double M, const Grid& grid);

}  // namespace platelab
