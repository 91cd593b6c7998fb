#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "platelab/optimizer.hpp"

namespace platelab {

/// One row of a field file.
struct FieldRow {
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
  double rho = 0.0;
};

/// Header `x,y,u,v,rho`, one row per interior node in node order, values
/// printed with 17 significant digits so a read gives back the same doubles.
void write_fields_csv(std::ostream& out, const Grid& grid, const ScalarField& u, const ScalarField& v,
                      const DensityField& rho);
void write_fields_csv(std::ostream& out, const std::vector<FieldRow>& rows);

/// Throws InvalidInput naming the 1-based line number of the first bad row.
std::vector<FieldRow> read_fields_csv(std::istream& in);

/// Fields of a file matched to the nodes of `grid` by position. Throws
/// InvalidInput when a row is not an interior node or a node is missing.
struct LoadedFields {
  ScalarField u;
  ScalarField v;
  ScalarField rho;
};
LoadedFields match_to_grid(const Grid& grid, const std::vector<FieldRow>& rows);

/// Smallest positive gap between distinct x (or y) coordinates.
double infer_spacing(const std::vector<FieldRow>& rows);

struct ImageScale {
  double min = 0.0;
  double max = 0.0;
};

/// 8-bit binary PGM of the full lattice (top row is the largest x2), values
/// mapped linearly from [min, max] of f onto [1, 255]; exterior pixels are 0.
ImageScale write_pgm(std::ostream& out, const Grid& grid, std::span<const double> f);

}  // namespace platelab
