#include "platelab/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

double compensated_sum(std::span<const double> terms) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void check_mass_bracket(double h, double H, double M, double measure) {
  if (!(h > 0.0) || !(H >= h) || !std::isfinite(H)) {
    throw InvalidInput("density bounds must satisfy 0 < h <= H");
  }
  const double lo = h * measure;
  const double hi = H * measure;
  if (!(M >= lo * (1.0 - 1e-12)) || !(M <= hi * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "mass " << M << " outside the admissible bracket [" << lo << ", " << hi << "]";
    throw InvalidInput(msg.str());
  }
}

DensityField DensityField::uniform(const Grid& grid, double h, double H, double M) {
  check_mass_bracket(h, H, M, grid.area());
  DensityField rho;
  rho.tag = grid.tag();
  rho.h = h;
  rho.H = H;
  rho.M = M;
  rho.cell_area = grid.cell_area();
  rho.values.assign(grid.size(), std::clamp(M / grid.area(), h, H));
  return rho;
}

double mass(const DensityField& rho) {
  std::vector<double> terms(rho.values.size());
  for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = rho.values[k] * rho.cell_area;
  return compensated_sum(terms);
}

void DensityField::validate() const {
  check_mass_bracket(h, H, M, static_cast<double>(values.size()) * cell_area);
  for (double r : values) {
    if (!(r >= h && r <= H)) {
      std::ostringstream msg;
      msg << "density value " << r << " outside [" << h << ", " << H << "]";
      throw InvalidInput(msg.str());
    }
  }
  if (std::abs(mass(*this) - M) > 1e-12 * M) throw InvalidInput("density mass does not match M");
}

Placement bathtub_placement(std::span<const double> u, std::span<const double> weights, double h, double H,
                            double M, double tie_tolerance) {
  if (u.size() != weights.size() || u.empty()) throw InvalidInput("bathtub: size mismatch");
  const double measure = compensated_sum(weights);
  check_mass_bracket(h, H, M, measure);

  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });

  Placement out;
  out.rho.assign(u.size(), h);
  double excess = M - h * measure;
  const double slack = 1e-13 * M;
  std::size_t full = 0;
  while (full < order.size()) {
    const double cap = (H - h) * weights[order[full]];
    if (excess - cap < -slack) break;
    out.rho[order[full]] = H;
    excess -= cap;
    ++full;
  }
  if (full == order.size()) {
    out.t = u[order.back()];
    return out;
  }
  out.t = u[order[full]];

  // Cells tied with the threshold cell form one plateau. A plateau split by
  // the ascending-index rule would make rho depend on round-off (mirror-image
  // nodes of a symmetric problem tie), so the plateau shares one value.
  const double tie = tie_tolerance * std::max(std::abs(u[order.front()]), std::abs(u[order.back()]));
  std::size_t g0 = full;
  std::size_t g1 = full + 1;
  while (g0 > 0 && u[order[g0 - 1]] - out.t <= tie) --g0;
  while (g1 < order.size() && out.t - u[order[g1]] <= tie) ++g1;
  if (g1 - g0 == 1 && !(excess > slack)) return out;

  std::vector<bool> in_group(u.size(), false);
  for (std::size_t p = g0; p < g1; ++p) in_group[order[p]] = true;
  // Balance against the compensated mass of everything outside the plateau.
  std::vector<double> rest(u.size());
  std::vector<double> group(u.size(), 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    rest[k] = in_group[k] ? 0.0 : out.rho[k] * weights[k];
    if (in_group[k]) group[k] = weights[k];
  }
  const double value = std::clamp((M - compensated_sum(rest)) / compensated_sum(group), h, H);
  for (std::size_t p = g0; p < g1; ++p) out.rho[order[p]] = value;
  if (value > h && value < H) out.fractional = *std::min_element(order.begin() + g0, order.begin() + g1);
  return out;
}

ThresholdResult optimal_density(const ScalarField& u, double h, double H, double M, const Grid& grid) {
  u.check_on(grid, "optimal_density");
  for (double x : u.values) {
    if (!(x > 0.0)) throw InvalidInput("optimal_density: u must be strictly positive");
  }
  const std::vector<double> weights(grid.size(), grid.cell_area());
  auto placement = bathtub_placement(u.values, weights, h, H, M);

  ThresholdResult out;
  out.rho.tag = grid.tag();
  out.rho.values = std::move(placement.rho);
  out.rho.h = h;
  out.rho.H = H;
  out.rho.M = M;
  out.rho.cell_area = grid.cell_area();
  out.t = placement.t;
  out.fractional = placement.fractional;
  return out;
}

}  // namespace platelab
