#include "platelab/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "platelab/error.hpp"

namespace platelab {

namespace {

// Uniform in [0, 1) from the top 53 bits; std distributions are not
// reproducible across standard libraries.
double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::theta_converged: return "theta-converged";
    case Termination::rho_fixed: return "rho-fixed";
    case Termination::max_outer: return "max-outer";
  }
  return "unknown";
}

DensityField random_density(const Grid& grid, double h, double H, double M, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double diam = grid.domain().diameter();
  constexpr int bumps = 3;
  std::vector<Vec2> centers;
  std::vector<double> amp;
  std::vector<double> width;
  for (int b = 0; b < bumps; ++b) {
    const auto k = static_cast<std::size_t>(unit_uniform(gen) * static_cast<double>(grid.size()));
    centers.push_back(grid.position(std::min(k, grid.size() - 1)));
    amp.push_back(0.5 + 0.5 * unit_uniform(gen));
    width.push_back(diam * (0.15 + 0.2 * unit_uniform(gen)));
  }
  ScalarField g = ScalarField::sample(grid, [&](Vec2 p) {
    double s = 0.05;
    for (int b = 0; b < bumps; ++b) {
      const Vec2 d = p - centers[b];
      s += amp[b] * std::exp(-dot(d, d) / (width[b] * width[b]));
    }
    return s;
  });
  return optimal_density(g, h, H, M, grid).rho;
}

OptimizeResult optimize_from(std::shared_ptr<const Grid> grid, const DiscreteLaplacian& a, const DensityField& initial,
                             const OptimizeOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const double h = initial.h;
  const double H = initial.H;
  const double M = initial.M;
  if (opts.max_outer < 1) throw InvalidInput("optimize: max_outer must be positive");

  OptimizeResult out;
  auto& rep = out.report;
  DensityField rho = initial;
  EigenResult eig = principal_pair(a, rho, opts.eigen);
  double t = 0.0;
  std::optional<std::size_t> fractional;
  rep.theta_history.push_back(eig.theta);
  rep.inner_iterations.push_back(eig.iterations);
  rep.eigen_increments.push_back(eig.last_increment);
  rep.mass_errors.push_back(std::abs(mass(rho) - M));

  rep.termination = Termination::max_outer;
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    ThresholdResult next = optimal_density(eig.u, h, H, M, *grid);
    t = next.t;
    fractional = next.fractional;
    rep.outer_iterations = outer;
    if (next.rho.values == rho.values) {
      rep.termination = Termination::rho_fixed;
      break;
    }
    rho = std::move(next.rho);
    // Warm start from the previous eigenfunction keeps the Rayleigh quotient
    // below its value before the rearrangement.
    EigenResult trial = principal_pair(a, rho, opts.eigen, &eig.u);
    const double prev = eig.theta;
    eig = std::move(trial);
    rep.theta_history.push_back(eig.theta);
    rep.inner_iterations.push_back(eig.iterations);
    rep.eigen_increments.push_back(eig.last_increment);
    rep.mass_errors.push_back(std::abs(mass(rho) - M));
    if (std::abs(eig.theta - prev) <= opts.theta_tol * prev) {
      rep.termination = Termination::theta_converged;
      break;
    }
  }

  out.pair.grid = std::move(grid);
  out.pair.u = std::move(eig.u);
  out.pair.v = std::move(eig.v);
  out.pair.rho = std::move(rho);
  out.pair.theta = eig.theta;
  out.pair.t = t;
  out.pair.fractional = fractional;
  rep.fixed_points.push_back({0, out.pair.theta, rep.termination});
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

OptimizeResult optimize(std::shared_ptr<const Grid> grid, const DiscreteLaplacian& a, double h, double H, double M,
                        const OptimizeOptions& opts) {
  check_mass_bracket(h, H, M, grid->area());
  if (opts.restarts < 1) throw InvalidInput("optimize: restarts must be at least 1");
  const auto started = std::chrono::steady_clock::now();

  std::optional<OptimizeResult> best;
  std::vector<FixedPoint> fixed;
  for (int r = 0; r < opts.restarts; ++r) {
    const bool randomized = r > 0 || opts.randomized_start;
    const DensityField initial = randomized
                                     ? random_density(*grid, h, H, M, opts.seed + 0x9E3779B97F4A7C15ULL * (r + 1))
                                     : DensityField::uniform(*grid, h, H, M);
    OptimizeResult run = optimize_from(grid, a, initial, opts);
    const FixedPoint fp{r, run.pair.theta, run.report.termination};
    bool distinct = true;
    for (const auto& f : fixed) {
      if (relative_gap(f.theta, fp.theta) <= 1e-6) distinct = false;
    }
    if (distinct) fixed.push_back(fp);
    if (!best || run.pair.theta < best->pair.theta) {
      best = std::move(run);
      best->report.best_restart = r;
    }
  }
  best->report.fixed_points = std::move(fixed);
  best->report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return std::move(*best);
}

OptimizeResult optimize(const DomainSpec& spec, int nodes_per_side, double h, double H, double M,
                        const OptimizeOptions& opts) {
  auto grid = std::make_shared<const Grid>(Grid::build(spec, nodes_per_side));
  const DiscreteLaplacian a = assemble_laplacian(*grid, opts.solver);
  return optimize(std::move(grid), a, h, H, M, opts);
}

}  // namespace platelab
