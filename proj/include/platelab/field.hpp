#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "platelab/geometry.hpp"

namespace platelab {

/// One value per interior node of a Grid, identified by the grid's tag.
struct ScalarField {
  GridTag tag = 0;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(GridTag t, std::vector<double> v) : tag(t), values(std::move(v)) {}

  static ScalarField zeros(const Grid& grid) { return {grid.tag(), std::vector<double>(grid.size(), 0.0)}; }
  static ScalarField constant(const Grid& grid, double value) {
    return {grid.tag(), std::vector<double>(grid.size(), value)};
  }
  template <class Fn>
  static ScalarField sample(const Grid& grid, Fn fn) {
    ScalarField f = zeros(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) f.values[k] = fn(grid.position(k));
    return f;
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }
  std::span<const double> view() const { return values; }

  /// Throws InvalidInput on a tag or length mismatch or a non-finite value.
  void check_on(const Grid& grid, const char* what) const;
};

double max_abs(std::span<const double> v);
double min_value(std::span<const double> v);

/// f composed with the reflection across {x_dir = lambda}, sampled at the
/// interior nodes. `present[k]` is false where the reflected point leaves the
/// domain.
struct ReflectedField {
  ScalarField values;
  std::vector<bool> present;
};

/// Values at reflected points: exact copies when the reflected point is a
/// lattice node, linear interpolation along the lattice line otherwise
/// (using the zero boundary value at the cut when one neighbor is exterior).
ReflectedField reflect_field(const Grid& grid, const ScalarField& f, const Axis& axis, double lambda);

}  // namespace platelab
