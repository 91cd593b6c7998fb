#include "platelab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

namespace {

double along(const Grid& grid, std::size_t k, int d) {
  const auto ij = grid.lattice(k);
  return grid.local_coordinate(d, d == 0 ? ij.i : ij.j) + grid.domain().center[d];
}

// Nearest plane position whose reflection maps lattice lines to lattice lines.
double snap_half_lattice(const Grid& grid, int d, double lambda) {
  const double r = grid.lattice_coordinate(d, lambda);
  const double snapped = std::round(2.0 * r) / 2.0;
  return lambda + (snapped - r) * grid.spacing();
}

void require_axis(const Grid& grid, const Axis& axis, const char* what) {
  axis.direction();
  if (!grid.domain().has_axis(axis)) {
    std::ostringstream msg;
    msg << what << ": axis " << (axis.direction() == 0 ? "x1 = " : "x2 = ") << axis.offset
        << " is not a declared symmetry axis";
    throw InvalidInput(msg.str());
  }
}

// Strictly beyond the plane; nodes on a snapped plane sit within round-off.
bool in_cap(const Grid& grid, std::size_t k, int d, double lambda) {
  return along(grid, k, d) > lambda + 1e-9 * grid.spacing();
}

}  // namespace

double asymmetry(const Grid& grid, const ScalarField& u, const Axis& axis) {
  require_axis(grid, axis, "asymmetry");
  const auto r = reflect_field(grid, u, axis, axis.offset);
  const double scale = max_abs(u.view());
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (r.present[k]) worst = std::max(worst, std::abs(u[k] - r.values[k]));
  }
  return worst / scale;
}

double monotonicity_violation(const Grid& grid, const ScalarField& u, const Axis& axis) {
  u.check_on(grid, "monotonicity_violation");
  const int d = axis.direction();
  const double eps = 1e-9 * grid.spacing();
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = along(grid, k, d);
    // Step one node away from the axis; both steps for a node on the axis.
    if (x >= axis.offset - eps) {
      const int n = grid.neighbor(k, d == 0 ? east : north);
      if (n >= 0) worst = std::max(worst, u[static_cast<std::size_t>(n)] - u[k]);
    }
    if (x <= axis.offset + eps) {
      const int n = grid.neighbor(k, d == 0 ? west : south);
      if (n >= 0) worst = std::max(worst, u[static_cast<std::size_t>(n)] - u[k]);
    }
  }
  return worst;
}

double min_reflection_gap(const Grid& grid, const ScalarField& f, const Axis& axis, double lambda,
                          std::size_t* cap_nodes) {
  const int d = axis.direction();
  const auto r = reflect_field(grid, f, axis, lambda);
  double lo = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!in_cap(grid, k, d, lambda) || !r.present[k]) continue;
    lo = std::min(lo, r.values[k] - f[k]);
    ++count;
  }
  if (cap_nodes != nullptr) *cap_nodes = count;
  return lo;
}

MovingPlaneReport moving_plane_profile(const OptimalPair& pair, const Axis& axis, int n_lambda) {
  const Grid& grid = *pair.grid;
  if (n_lambda < 8) throw InvalidInput("moving_plane_profile: n_lambda must be at least 8");
  const int d = axis.direction();
  MovingPlaneReport rep;
  rep.axis = axis;
  rep.caps = reflection_caps(grid.domain(), axis);
  const double delta = grid.spacing();
  const double lo = std::max(rep.caps.lambda1, axis.offset) + 2.0 * delta;
  const double hi = rep.caps.lambda0 - 2.0 * delta;
  if (!(lo < hi)) throw InvalidInput("moving_plane_profile: empty lambda window");

  rep.norm_u = max_abs(pair.u.view());
  rep.norm_v = max_abs(pair.v.view());
  rep.min_w_u = std::numeric_limits<double>::infinity();
  rep.min_w_v = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_lambda; ++s) {
    double lambda = lo + (hi - lo) * s / (n_lambda - 1);
    const double snapped = snap_half_lattice(grid, d, lambda);
    if (snapped >= lo - 0.5 * delta && snapped <= hi + 0.5 * delta) lambda = snapped;
    PlaneSample p;
    p.lambda = lambda;
    p.min_w_u = min_reflection_gap(grid, pair.u, axis, lambda, &p.cap_nodes);
    p.min_w_v = min_reflection_gap(grid, pair.v, axis, lambda);
    rep.min_w_u = std::min(rep.min_w_u, p.min_w_u);
    rep.min_w_v = std::min(rep.min_w_v, p.min_w_v);
    rep.samples.push_back(p);
  }
  return rep;
}

ProductCheck product_check(const Grid& grid, const ScalarField& u, const DensityField& rho, double t, const Axis& axis,
                           double lambda) {
  u.check_on(grid, "product_check");
  if (rho.tag != grid.tag() || rho.size() != grid.size()) throw InvalidInput("product_check: density on a different grid");
  const int d = axis.direction();
  const double scale = max_abs(u.view());
  const auto ur = reflect_field(grid, u, axis, lambda);
  const auto rr = reflect_field(grid, ScalarField(grid.tag(), rho.values), axis, lambda);

  ProductCheck out;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!in_cap(grid, k, d, lambda) || !ur.present[k]) continue;
    const double w = ur.values[k] - u[k];
    if (w < -1e-10 * scale) {
      std::ostringstream msg;
      msg << "product_check: u o phi - u = " << w << " < 0 at node " << k << "; check not applicable";
      throw InvalidInput(msg.str());
    }
    const bool above = u[k] > t;
    const bool image_above = ur.values[k] > t;
    // Off-lattice reflections have no node value of rho; use the bang-bang rule.
    const double image = grid.lattice_coordinate(d, 2.0 * lambda - along(grid, k, d));
    const bool on_lattice = std::abs(image - std::round(image)) <= 1e-9;
    const double rho_image = on_lattice && rr.present[k] ? rr.values[k] : (image_above ? rho.H : rho.h);
    const int c = above ? (image_above ? 0 : 2) : (image_above ? 3 : 1);
    ++out.cases[static_cast<std::size_t>(c)];
    if (c == 2 && out.ok) {
      out.ok = false;
      out.worst_node = k;
      out.worst_value = rho_image * ur.values[k] - rho[k] * u[k];
    }
    const double diff = rho_image * ur.values[k] - rho[k] * u[k];
    if (diff < worst) {
      worst = diff;
      if (out.ok) {
        out.worst_node = k;
        out.worst_value = diff;
      }
    }
  }
  if (worst < -1e-10 * rho.H * scale) out.ok = false;
  return out;
}

std::optional<double> interpolate(const Grid& grid, const ScalarField& u, Vec2 p) {
  const double rx = grid.lattice_coordinate(0, p.x);
  const double ry = grid.lattice_coordinate(1, p.y);
  const int i = static_cast<int>(std::floor(rx));
  const int j = static_cast<int>(std::floor(ry));
  const double fx = rx - i;
  const double fy = ry - j;
  const int n00 = grid.index(i, j);
  const int n10 = grid.index(i + 1, j);
  const int n01 = grid.index(i, j + 1);
  const int n11 = grid.index(i + 1, j + 1);
  if (n00 < 0 || n10 < 0 || n01 < 0 || n11 < 0) return std::nullopt;
  auto at = [&](int n) { return u[static_cast<std::size_t>(n)]; };
  return (1 - fx) * (1 - fy) * at(n00) + fx * (1 - fy) * at(n10) + (1 - fx) * fy * at(n01) + fx * fy * at(n11);
}

RigidityReport normal_derivative_stats(const OptimalPair& pair, std::size_t count) {
  const Grid& grid = *pair.grid;
  const auto points = sample_boundary(grid.domain(), std::max<std::size_t>(count, 64));
  const double delta = grid.spacing();
  RigidityReport rep;
  for (const auto& b : points) {
    std::optional<double> value;
    for (double s = 1.5 * delta; s <= 3.0 * delta + 1e-12 && !value; s += 0.25 * delta) {
      const auto near = interpolate(grid, pair.u, b.point - s * b.normal);
      const auto far = interpolate(grid, pair.u, b.point - 2.0 * s * b.normal);
      if (near && far) value = (*far - 4.0 * *near) / (2.0 * s);
    }
    if (value) {
      rep.samples.push_back(*value);
    } else {
      ++rep.skipped;
    }
  }
  if (rep.skipped * 10 > points.size()) {
    std::ostringstream msg;
    msg << "normal_derivative_stats: " << rep.skipped << " of " << points.size()
        << " boundary points lack interior support";
    throw GridError(msg.str());
  }
  const double n = static_cast<double>(rep.samples.size());
  rep.mean = compensated_sum(rep.samples) / n;
  std::vector<double> sq(rep.samples.size());
  for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = (rep.samples[k] - rep.mean) * (rep.samples[k] - rep.mean);
  rep.stdev = std::sqrt(compensated_sum(sq) / n);
  rep.cv = rep.stdev / std::abs(rep.mean);
  rep.all_negative = std::all_of(rep.samples.begin(), rep.samples.end(), [](double x) { return x < 0.0; });
  return rep;
}

std::optional<bool> tubular(const Grid& grid, const ScalarField& u, const DensityField& rho, double t) {
  u.check_on(grid, "tubular");
  const std::size_t below =
      static_cast<std::size_t>(std::count_if(rho.values.begin(), rho.values.end(), [&](double r) { return r < rho.H; }));
  if (below <= 1) return std::nullopt;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.boundary_adjacent(k) && u[k] > t) return false;
  }
  return true;
}

bool axis_convex(const Grid& grid, const ScalarField& u, double t, std::string* detail) {
  u.check_on(grid, "axis_convex");
  const double delta = grid.spacing();
  for (const Axis& axis : grid.domain().axes) {
    const int d = axis.direction();
    const int lines = d == 0 ? grid.ny() : grid.nx();
    const int length = d == 0 ? grid.nx() : grid.ny();
    for (int l = 0; l < lines; ++l) {
      int first = -1;
      int last = -1;
      bool broken = false;
      for (int m = 0; m < length; ++m) {
        const int n = d == 0 ? grid.index(m, l) : grid.index(l, m);
        const bool in = n >= 0 && u[static_cast<std::size_t>(n)] > t;
        if (!in) continue;
        if (last >= 0 && m != last + 1) broken = true;
        if (first < 0) first = m;
        last = m;
      }
      if (first < 0) continue;
      const double mid = 0.5 * (grid.coordinate(d, first) + grid.coordinate(d, last));
      const bool centered = std::abs(mid - axis.offset) <= delta * (1.0 + 1e-9);
      if (broken || !centered) {
        if (detail != nullptr) {
          std::ostringstream msg;
          msg << "superlevel set on lattice line " << l << (d == 0 ? " (along x1)" : " (along x2)")
              << (broken ? " is not one run" : " is off the axis");
          *detail = msg.str();
        }
        return false;
      }
    }
  }
  return true;
}

StructuralReport structural_checks(const OptimalPair& pair) {
  const Grid& grid = *pair.grid;
  StructuralReport rep;
  rep.tubular = tubular(grid, pair.u, pair.rho, pair.t);
  rep.axis_convex = axis_convex(grid, pair.u, pair.t, &rep.detail);
  rep.positive = std::all_of(pair.u.values.begin(), pair.u.values.end(), [](double x) { return x > 0.0; }) &&
                 std::all_of(pair.v.values.begin(), pair.v.values.end(), [](double x) { return x > 0.0; });
  return rep;
}

double rotational_asymmetry(const Grid& grid, const ScalarField& u, int rotations) {
  u.check_on(grid, "rotational_asymmetry");
  if (rotations < 2) throw InvalidInput("rotational_asymmetry: need at least 2 rotations");
  const double scale = max_abs(u.view());
  if (scale == 0.0) return 0.0;
  const Vec2 c = grid.domain().center;
  double worst = 0.0;
  for (int r = 1; r < rotations; ++r) {
    const double a = 2.0 * std::numbers::pi * r / rotations;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec2 p = grid.position(k) - c;
      const auto value = interpolate(grid, u, c + Vec2{ca * p.x - sa * p.y, sa * p.x + ca * p.y});
      if (value) worst = std::max(worst, std::abs(*value - u[k]));
    }
  }
  return worst / scale;
}

}  // namespace platelab
