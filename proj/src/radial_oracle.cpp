#include "platelab/radial_oracle.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

namespace {

// Symmetric tridiagonal form K u = W f of the flux-form radial operator.
struct RadialOperator {
  std::vector<double> r;
  std::vector<double> w;
  std::vector<double> diag;
  std::vector<double> off;  // off[j] couples j and j + 1

  std::size_t size() const { return r.size(); }

  std::vector<double> solve(const std::vector<double>& f) const {
    const std::size_t n = size();
    std::vector<double> c(n), d(n);
    double denom = diag[0];
    c[0] = n > 1 ? off[0] / denom : 0.0;
    d[0] = w[0] * f[0] / denom;
    for (std::size_t j = 1; j < n; ++j) {
      denom = diag[j] - off[j - 1] * c[j - 1];
      c[j] = j + 1 < n ? off[j] / denom : 0.0;
      d[j] = (w[j] * f[j] - off[j - 1] * d[j - 1]) / denom;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = d[j] - c[j] * x[j + 1];
    return x;
  }
};

RadialOperator build(const DomainSpec& spec, int n_r) {
  if (n_r < 64) throw InvalidInput("radial_optimize: n_r must be at least 64");
  constexpr double pi = std::numbers::pi;
  RadialOperator op;
  if (spec.kind == DomainKind::disk) {
    const double dr = spec.first / n_r;
    for (int j = 0; j < n_r; ++j) op.r.push_back(j * dr);
    op.w.push_back(pi * dr * dr / 4.0);
    for (int j = 1; j < n_r; ++j) op.w.push_back(2.0 * pi * op.r[j] * dr);
    // Row j: 2 pi (r_{j+1/2} + r_{j-1/2}) / dr on the diagonal; the centre
    // row is pi (4 (u0 - u1) / dr^2 scaled by pi dr^2 / 4).
    for (int j = 0; j < n_r; ++j) {
      const double outer = 2.0 * pi * (op.r[j] + 0.5 * dr) / dr;
      const double inner = j == 0 ? 0.0 : 2.0 * pi * (op.r[j] - 0.5 * dr) / dr;
      op.diag.push_back(outer + inner);
      if (j + 1 < n_r) op.off.push_back(-outer);
    }
  } else if (spec.kind == DomainKind::annulus) {
    const double a = spec.first;
    const double dr = (spec.second - a) / n_r;
    for (int j = 1; j < n_r; ++j) op.r.push_back(a + j * dr);
    for (double r : op.r) op.w.push_back(2.0 * pi * r * dr);
    for (std::size_t j = 0; j < op.r.size(); ++j) {
      const double outer = 2.0 * pi * (op.r[j] + 0.5 * dr) / dr;
      const double inner = 2.0 * pi * (op.r[j] - 0.5 * dr) / dr;
      op.diag.push_back(outer + inner);
      if (j + 1 < op.r.size()) op.off.push_back(-outer);
    }
  } else {
    throw InvalidInput("radial_optimize: only disk and annulus domains are radial");
  }
  return op;
}

double weighted(const std::vector<double>& w, const std::vector<double>& a, const std::vector<double>& b,
                const std::vector<double>* rho = nullptr) {
  std::vector<double> terms(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) terms[j] = w[j] * a[j] * b[j] * (rho ? (*rho)[j] : 1.0);
  return compensated_sum(terms);
}

struct Pair {
  double theta = 0.0;
  std::vector<double> u;
  std::vector<double> v;
  int iterations = 0;
  double increment = 0.0;
};

Pair principal(const RadialOperator& op, const std::vector<double>& rho, std::vector<double> u, const EigenOptions& eo) {
  Pair p;
  double prev = 0.0;
  std::vector<double> f(op.size());
  for (int it = 1; it <= eo.max_iter; ++it) {
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = rho[j] * u[j];
    std::vector<double> v = op.solve(f);
    std::vector<double> next = op.solve(v);
    const double scale = 1.0 / std::sqrt(weighted(op.w, next, next, &rho));
    for (auto& x : next) x *= scale;
    for (auto& x : v) x *= scale;
    const double theta = weighted(op.w, v, v) / weighted(op.w, next, next, &rho);
    u = next;
    p.u = std::move(next);
    p.v = std::move(v);
    p.theta = theta;
    p.iterations = it;
    if (it > 1) {
      p.increment = std::abs(theta - prev);
      if (p.increment <= eo.tol * prev) return p;
    }
    prev = theta;
  }
  std::ostringstream msg;
  msg << "radial_optimize: eigen iteration did not converge (theta " << p.theta << ")";
  throw ConvergenceError(msg.str(), p.theta);
}

}  // namespace

double radial_measure(const DomainSpec& spec, int n_r) {
  return compensated_sum(build(spec, n_r).w);
}

RadialResult radial_optimize(const DomainSpec& spec, double h, double H, double M, int n_r,
                             const OptimizeOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  spec.validate();
  const RadialOperator op = build(spec, n_r);
  check_mass_bracket(h, H, M, compensated_sum(op.w));
  if (opts.max_outer < 1) throw InvalidInput("radial_optimize: max_outer must be positive");

  RadialResult out;
  out.r = op.r;
  out.weights = op.w;
  auto& rep = out.report;
  std::vector<double> rho(op.size(), std::clamp(M / compensated_sum(op.w), h, H));
  auto record = [&](const Pair& p) {
    rep.theta_history.push_back(p.theta);
    rep.inner_iterations.push_back(p.iterations);
    rep.eigen_increments.push_back(p.increment);
    rep.mass_errors.push_back(std::abs(weighted(op.w, rho, std::vector<double>(rho.size(), 1.0)) - M));
  };

  Pair pair = principal(op, rho, std::vector<double>(op.size(), 1.0), opts.eigen);
  record(pair);
  rep.termination = Termination::max_outer;
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    Placement next = bathtub_placement(pair.u, op.w, h, H, M);
    out.t = next.t;
    out.fractional = next.fractional;
    rep.outer_iterations = outer;
    if (next.rho == rho) {
      rep.termination = Termination::rho_fixed;
      break;
    }
    rho = std::move(next.rho);
    const double prev = pair.theta;
    pair = principal(op, rho, pair.u, opts.eigen);
    record(pair);
    if (std::abs(pair.theta - prev) <= opts.theta_tol * prev) {
      rep.termination = Termination::theta_converged;
      break;
    }
  }
  out.theta = pair.theta;
  out.u = std::move(pair.u);
  out.v = std::move(pair.v);
  out.rho = std::move(rho);
  rep.fixed_points.push_back({0, out.theta, rep.termination});
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace platelab
