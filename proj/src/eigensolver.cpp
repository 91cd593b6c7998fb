#include "platelab/eigensolver.hpp"

#include <cmath>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

namespace {

double weighted_square_sum(const ScalarField& u, const DensityField& rho) {
  std::vector<double> terms(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) terms[k] = rho[k] * u[k] * u[k];
  return compensated_sum(terms);
}

double square_sum(const ScalarField& v) {
  std::vector<double> terms(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) terms[k] = v[k] * v[k];
  return compensated_sum(terms);
}

}  // namespace

double rayleigh_quotient(const ScalarField& u, const ScalarField& v, const DensityField& rho) {
  if (u.tag != v.tag || u.tag != rho.tag || u.size() != v.size() || u.size() != rho.size()) {
    throw InvalidInput("rayleigh_quotient: fields live on different grids");
  }
  const double den = weighted_square_sum(u, rho);
  if (!(den > 0.0)) throw InvalidInput("rayleigh_quotient: zero denominator");
  return square_sum(v) / den;
}

EigenResult principal_pair(const DiscreteLaplacian& a, const DensityField& rho, const EigenOptions& opts,
                           const ScalarField* start) {
  if (rho.tag != a.tag() || rho.size() != a.size()) throw InvalidInput("principal_pair: density on a different grid");
  rho.validate();
  if (!(opts.tol > 0.0 && opts.tol <= 1e-6)) throw InvalidInput("principal_pair: tol must lie in (0, 1e-6]");

  ScalarField u(a.tag(), std::vector<double>(a.size(), 1.0));
  if (start != nullptr) {
    if (start->tag != a.tag() || start->size() != a.size()) throw InvalidInput("principal_pair: start on a different grid");
    for (double x : start->values) {
      if (!(x > 0.0)) throw InvalidInput("principal_pair: start vector must be positive");
    }
    u = *start;
  }

  EigenResult res;
  NavierSolution guess;
  bool have_guess = false;
  ScalarField f(a.tag(), std::vector<double>(a.size()));
  double theta_prev = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = rho[k] * u[k];
    NavierSolution next = solve_navier(a, f, opts.linear_tol, have_guess ? &guess : nullptr);
    const double scale = 1.0 / std::sqrt(weighted_square_sum(next.u, rho) * rho.cell_area);
    for (auto& x : next.u.values) x *= scale;
    for (auto& x : next.v.values) x *= scale;
    const double theta = rayleigh_quotient(next.u, next.v, rho);

    u = next.u;
    res.history.push_back(theta);
    res.iterations = it;
    res.theta = theta;
    // Near convergence A^{-1} rho u ~ v / theta and A^{-2} rho u ~ u / theta.
    guess.u = next.u;
    guess.v = next.v;
    for (auto& x : guess.u.values) x /= theta;
    for (auto& x : guess.v.values) x /= theta;
    have_guess = true;
    res.u = std::move(next.u);
    res.v = std::move(next.v);

    if (it > 1) {
      res.last_increment = std::abs(theta - theta_prev);
      if (res.last_increment <= opts.tol * theta_prev) return res;
    }
    theta_prev = theta;
  }
  std::ostringstream msg;
  msg << "principal_pair: no convergence after " << opts.max_iter << " iterations (theta " << res.theta << ")";
  throw ConvergenceError(msg.str(), res.theta);
}

}  // namespace platelab
