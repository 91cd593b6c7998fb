#include "platelab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "platelab/error.hpp"

namespace platelab {

void ScalarField::check_on(const Grid& grid, const char* what) const {
  if (tag != grid.tag()) throw InvalidInput(std::string(what) + ": field belongs to a different grid");
  if (values.size() != grid.size()) throw InvalidInput(std::string(what) + ": field length does not match grid");
  for (double x : values) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite value");
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double min_value(std::span<const double> v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return m;
}

ReflectedField reflect_field(const Grid& grid, const ScalarField& f, const Axis& axis, double lambda) {
  f.check_on(grid, "reflect_field");
  const int d = axis.direction();
  const double c = grid.domain().center[d];
  ReflectedField out{ScalarField::zeros(grid), std::vector<bool>(grid.size(), false)};

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto ij = grid.lattice(k);
    const int along = d == 0 ? ij.i : ij.j;
    // Reflect in center-relative coordinates so a symmetry plane through the
    // center maps lattice lines onto lattice lines without rounding.
    const double local = 2.0 * (lambda - c) - grid.local_coordinate(d, along);
    const double r = grid.lattice_coordinate(d, c + local);
    auto node_at = [&](int m) { return d == 0 ? grid.index(m, ij.j) : grid.index(ij.i, m); };

    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= 1e-9) {
      const int n = node_at(static_cast<int>(nearest));
      if (n >= 0) {
        out.values[k] = f[static_cast<std::size_t>(n)];
        out.present[k] = true;
      }
      continue;
    }
    const int m0 = static_cast<int>(std::floor(r));
    const double w = r - m0;
    const int n0 = node_at(m0);
    const int n1 = node_at(m0 + 1);
    if (n0 >= 0 && n1 >= 0) {
      out.values[k] = (1.0 - w) * f[static_cast<std::size_t>(n0)] + w * f[static_cast<std::size_t>(n1)];
      out.present[k] = true;
    } else if (n0 >= 0) {
      // Boundary crosses between m0 and m0+1 at distance theta from m0.
      const double theta = grid.cuts(static_cast<std::size_t>(n0))[d == 0 ? east : north];
      if (w <= theta) {
        out.values[k] = (1.0 - w / theta) * f[static_cast<std::size_t>(n0)];
        out.present[k] = true;
      }
    } else if (n1 >= 0) {
      const double theta = grid.cuts(static_cast<std::size_t>(n1))[d == 0 ? west : south];
      const double from1 = 1.0 - w;
      if (from1 <= theta) {
        out.values[k] = (1.0 - from1 / theta) * f[static_cast<std::size_t>(n1)];
        out.present[k] = true;
      }
    }
  }
  return out;
}

}  // namespace platelab
