#include "platelab/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

namespace {

constexpr const char* header = "x,y,u,v,rho";

void put(std::ostream& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& why) {
  std::ostringstream msg;
  msg << "fields file, row " << line << ": " << why;
  throw InvalidInput(msg.str());
}

}  // namespace

void write_fields_csv(std::ostream& out, const std::vector<FieldRow>& rows) {
  out << header << '\n';
  for (const auto& r : rows) {
    put(out, r.x);
    out << ',';
    put(out, r.y);
    out << ',';
    put(out, r.u);
    out << ',';
    put(out, r.v);
    out << ',';
    put(out, r.rho);
    out << '\n';
  }
}

void write_fields_csv(std::ostream& out, const Grid& grid, const ScalarField& u, const ScalarField& v,
                      const DensityField& rho) {
  u.check_on(grid, "write_fields_csv");
  v.check_on(grid, "write_fields_csv");
  if (rho.tag != grid.tag() || rho.size() != grid.size()) throw InvalidInput("write_fields_csv: density on another grid");
  std::vector<FieldRow> rows(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 p = grid.position(k);
    rows[k] = {p.x, p.y, u[k], v[k], rho[k]};
  }
  write_fields_csv(out, rows);
}

std::vector<FieldRow> read_fields_csv(std::istream& in) {
  std::string line;
  std::size_t number = 1;
  if (!std::getline(in, line)) bad_row(number, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) bad_row(number, "expected header '" + std::string(header) + "'");

  std::vector<FieldRow> rows;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double vals[5];
    const char* p = line.c_str();
    for (int c = 0; c < 5; ++c) {
      char* end = nullptr;
      errno = 0;
      vals[c] = std::strtod(p, &end);
      if (end == p || errno == ERANGE || !std::isfinite(vals[c])) bad_row(number, "column " + std::to_string(c + 1) + " is not a finite number");
      p = end;
      if (c < 4) {
        if (*p != ',') bad_row(number, "expected 5 comma-separated columns");
        ++p;
      }
    }
    if (*p != '\0') bad_row(number, "trailing characters after column 5");
    rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4]});
  }
  if (rows.empty()) bad_row(number, "no data rows");
  return rows;
}

double infer_spacing(const std::vector<FieldRow>& rows) {
  double best = 0.0;
  for (int d = 0; d < 2; ++d) {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(d == 0 ? r.x : r.y);
    std::sort(c.begin(), c.end());
    const double scale = std::max(std::abs(c.front()), std::abs(c.back()));
    for (std::size_t k = 1; k < c.size(); ++k) {
      const double gap = c[k] - c[k - 1];
      if (gap > 1e-9 * std::max(scale, 1.0) && (best == 0.0 || gap < best)) best = gap;
    }
  }
  if (best == 0.0) throw InvalidInput("fields file: cannot infer the lattice spacing from a single node line");
  return best;
}

LoadedFields match_to_grid(const Grid& grid, const std::vector<FieldRow>& rows) {
  LoadedFields out{ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)};
  std::vector<bool> seen(grid.size(), false);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    const double fi = grid.lattice_coordinate(0, r.x);
    const double fj = grid.lattice_coordinate(1, r.y);
    const double i = std::round(fi);
    const double j = std::round(fj);
    const int k = std::abs(fi - i) <= 1e-6 && std::abs(fj - j) <= 1e-6
                      ? grid.index(static_cast<int>(i), static_cast<int>(j))
                      : -1;
    if (k < 0) bad_row(n + 2, "point is not an interior node of the grid");
    if (seen[static_cast<std::size_t>(k)]) bad_row(n + 2, "duplicate node");
    seen[static_cast<std::size_t>(k)] = true;
    out.u[static_cast<std::size_t>(k)] = r.u;
    out.v[static_cast<std::size_t>(k)] = r.v;
    out.rho[static_cast<std::size_t>(k)] = r.rho;
  }
  if (rows.size() != grid.size()) {
    std::ostringstream msg;
    msg << "fields file has " << rows.size() << " rows, the grid has " << grid.size() << " interior nodes";
    throw InvalidInput(msg.str());
  }
  return out;
}

ImageScale write_pgm(std::ostream& out, const Grid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw InvalidInput("write_pgm: field length does not match grid");
  ImageScale s{*std::min_element(f.begin(), f.end()), *std::max_element(f.begin(), f.end())};
  const double range = s.max - s.min;
  out << "P5\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
  std::string row(static_cast<std::size_t>(grid.nx()), '\0');
  for (int j = grid.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const int k = grid.index(i, j);
      unsigned char px = 0;
      if (k >= 0) {
        const double a = range > 0.0 ? (f[static_cast<std::size_t>(k)] - s.min) / range : 1.0;
        px = static_cast<unsigned char>(1 + std::lround(254.0 * a));
      }
      row[static_cast<std::size_t>(i)] = static_cast<char>(px);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  return s;
}

}  // namespace platelab
