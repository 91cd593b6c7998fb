#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "platelab/eigensolver.hpp"
#include "platelab/error.hpp"

using namespace platelab;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double j01 = 2.404825557695773;

double uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

struct Setup {
  Grid grid;
  DiscreteLaplacian a;
  explicit Setup(const DomainSpec& spec, int n) : grid(Grid::build(spec, n)), a(assemble_laplacian(grid)) {}
  DensityField uniform_density(double value) const {
    return DensityField::uniform(grid, value, value, value * grid.area());
  }
};

}  // namespace

TEST_CASE("unit square, uniform density") {
  const Setup s(DomainSpec::unit_square(), 129);
  const auto r = principal_pair(s.a, s.uniform_density(1.0));
  CHECK(std::abs(r.theta / (4 * std::pow(pi, 4)) - 1) < 0.01);
  CHECK(min_value(r.u.view()) > 0.0);
  CHECK(min_value(r.v.view()) > 0.0);
  CHECK(rayleigh_quotient(r.u, r.v, s.uniform_density(1.0)) == r.theta);
}

TEST_CASE("unit disk, uniform density") {
  const Setup s(DomainSpec::disk(1.0), 257);
  const auto rho = s.uniform_density(1.0);
  const auto r = principal_pair(s.a, rho);
  CHECK(std::abs(r.theta / std::pow(j01, 4) - 1) < 0.01);

  double norm = 0.0;
  for (std::size_t k = 0; k < r.u.size(); ++k) norm += rho[k] * r.u[k] * r.u[k];
  CHECK(std::abs(norm * s.grid.cell_area() - 1) <= 1e-12);
}

TEST_CASE("density scaling halves the eigenvalue") {
  const Setup s(DomainSpec::ellipse(1.0, 0.6), 65);
  const auto one = principal_pair(s.a, s.uniform_density(1.0));
  const auto two = principal_pair(s.a, s.uniform_density(2.0));
  CHECK(two.theta == doctest::Approx(one.theta / 2).epsilon(1e-12));
  CHECK(two.iterations == one.iterations);
}

TEST_CASE("inverse iteration invariants") {
  for (const auto& spec : {DomainSpec::disk(1.0), DomainSpec::annulus(0.4, 1.0), DomainSpec::stadium(1.0, 0.5)}) {
    const Setup s(spec, 65);
    const auto r = principal_pair(s.a, s.uniform_density(1.0));
    REQUIRE(r.history.size() >= 2);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1] * (1 + 1e-12));
    CHECK(min_value(r.u.view()) > 0.0);
    CHECK(min_value(r.v.view()) > 0.0);
    CHECK(r.last_increment <= 1e-9 * r.theta);
  }
}

TEST_CASE("Rayleigh quotient") {
  const Setup s(DomainSpec::unit_square(), 33);
  const auto rho = s.uniform_density(1.0);
  const auto r = principal_pair(s.a, rho);

  SUBCASE("homogeneous of degree zero") {
    for (double c : {-3.0, 1e-3, 7.5}) {
      auto u = r.u;
      auto v = r.v;
      for (auto& x : u.values) x *= c;
      for (auto& x : v.values) x *= c;
      CHECK(rayleigh_quotient(u, v, rho) == doctest::Approx(r.theta).epsilon(1e-13));
    }
  }
  SUBCASE("random positive trials do not undercut the minimum") {
    // The square operator is symmetric, so the quotient is variational.
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
      const double mix = uniform(gen);
      auto w = ScalarField::zeros(s.grid);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] = (1 - mix) * r.u[k] + mix * (0.01 + uniform(gen));
      const auto v = apply_laplacian(s.a, w);
      CHECK(rayleigh_quotient(w, v, rho) >= r.theta * (1 - 1e-9));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rayleigh_quotient(ScalarField::zeros(s.grid), r.v, rho), InvalidInput);
    const Grid other = Grid::build(DomainSpec::unit_square(), 33);
    CHECK_THROWS_AS(rayleigh_quotient(ScalarField::constant(other, 1.0), r.v, rho), InvalidInput);
  }
}

TEST_CASE("independent starts reach the same eigenfunction") {
  const Setup s(DomainSpec::unit_square(), 33);
  const auto rho = s.uniform_density(1.0);
  EigenOptions opts;
  opts.tol = 1e-15;
  std::mt19937_64 gen(99);
  std::vector<ScalarField> found;
  for (int run = 0; run < 2; ++run) {
    auto start = ScalarField::zeros(s.grid);
    for (auto& x : start.values) x = 0.1 + uniform(gen);
    found.push_back(principal_pair(s.a, rho, opts, &start).u);
  }
  double diff = 0.0;
  for (std::size_t k = 0; k < found[0].size(); ++k) diff = std::max(diff, std::abs(found[0][k] - found[1][k]));
  CHECK(diff <= 1e-8 * max_abs(found[0].view()));
}

TEST_CASE("principal_pair errors") {
  const Setup s(DomainSpec::disk(1.0), 33);
  const auto rho = s.uniform_density(1.0);
  EigenOptions opts;
  opts.max_iter = 2;
  try {
    principal_pair(s.a, rho, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_theta() > 0.0);
  }
  opts = {};
  opts.tol = 1e-5;
  CHECK_THROWS_AS(principal_pair(s.a, rho, opts), InvalidInput);
  opts.tol = 0.0;
  CHECK_THROWS_AS(principal_pair(s.a, rho, opts), InvalidInput);

  auto bad = rho;
  bad.values[0] = 2.0;
  CHECK_THROWS_AS(principal_pair(s.a, bad), InvalidInput);

  auto start = ScalarField::constant(s.grid, 1.0);
  start[3] = 0.0;
  CHECK_THROWS_AS(principal_pair(s.a, rho, {}, &start), InvalidInput);
}
