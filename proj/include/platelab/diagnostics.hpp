#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "platelab/optimizer.hpp"

namespace platelab {

/// ||u - u o phi||_inf / ||u||_inf for the reflection across a declared
/// symmetry axis. Throws InvalidInput for an undeclared axis.
double asymmetry(const Grid& grid, const ScalarField& u, const Axis& axis);

/// Largest increase u(y) - u(x) over lattice-neighbor pairs where y is one
/// node farther from the axis than x, on either side (0 when u decreases
/// away from the axis).
double monotonicity_violation(const Grid& grid, const ScalarField& u, const Axis& axis);

struct PlaneSample {
  double lambda = 0.0;
  double min_w_u = 0.0;
  double min_w_v = 0.0;
  std::size_t cap_nodes = 0;
};

struct MovingPlaneReport {
  Axis axis;
  ReflectionCaps caps;
  std::vector<PlaneSample> samples;
  double min_w_u = 0.0;
  double min_w_v = 0.0;
  double norm_u = 0.0;
  double norm_v = 0.0;
};

/// Minima of w = f o phi_lambda - f over the cap {x_dir > lambda} for f = u
/// and f = v. The n_lambda planes are equispaced in the window
/// (max(lambda1, offset) + 2 delta, lambda0 - 2 delta) and then moved to the
/// nearest half-lattice position so reflected nodes land on nodes.
MovingPlaneReport moving_plane_profile(const OptimalPair& pair, const Axis& axis, int n_lambda = 16);

/// w = f o phi_lambda - f on the cap; nodes whose reflection leaves the
/// domain are skipped. Returns +inf for an empty cap.
double min_reflection_gap(const Grid& grid, const ScalarField& f, const Axis& axis, double lambda,
                          std::size_t* cap_nodes = nullptr);

struct ProductCheck {
  bool ok = true;
  /// Node with the smallest product difference (or the first Case III node).
  std::optional<std::size_t> worst_node;
  double worst_value = 0.0;
  /// Nodes per case: I both above t, II both at or below t, III x above and
  /// reflection at or below, IV x at or below and reflection above.
  std::array<std::size_t, 4> cases{};
};

/// Checks (rho o phi)(u o phi) - rho u >= 0 on the cap {x_dir > lambda} and
/// that no Case III node exists. Requires u o phi - u >= -1e-10 ||u|| on the
/// cap; throws InvalidInput otherwise.
ProductCheck product_check(const Grid& grid, const ScalarField& u, const DensityField& rho, double t, const Axis& axis,
                           double lambda);

struct RigidityReport {
  std::vector<double> samples;  ///< du/dnu at the used boundary points
  std::size_t skipped = 0;
  double mean = 0.0;
  double stdev = 0.0;
  double cv = 0.0;
  bool all_negative = false;
};

/// Outward normal derivative of u on at least 64 boundary points by the
/// one-sided second-order formula (u(p - 2s nu) - 4 u(p - s nu)) / (2 s) with
/// bilinearly interpolated values. Throws if more than 10% of the points lack
/// interior support.
RigidityReport normal_derivative_stats(const OptimalPair& pair, std::size_t count = 256);

struct StructuralReport {
  /// Every boundary-adjacent node has u <= t; empty when rho is H everywhere
  /// (no sublevel set to test).
  std::optional<bool> tubular;
  bool axis_convex = true;
  bool positive = true;
  std::string detail;
};

StructuralReport structural_checks(const OptimalPair& pair);

/// Lower-level pieces of structural_checks, usable on synthetic fields.
bool axis_convex(const Grid& grid, const ScalarField& u, double t, std::string* detail = nullptr);
std::optional<bool> tubular(const Grid& grid, const ScalarField& u, const DensityField& rho, double t);

/// Bilinear interpolation of u at p; empty unless all four surrounding
/// lattice nodes are interior.
std::optional<double> interpolate(const Grid& grid, const ScalarField& u, Vec2 p);

/// max over rotations R by 2 pi k / rotations about the domain center of
/// ||u - u o R||_inf / ||u||_inf. Nodes whose rotated image lacks
/// interpolation support are skipped.
double rotational_asymmetry(const Grid& grid, const ScalarField& u, int rotations = 32);

}  // namespace platelab
