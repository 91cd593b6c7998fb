#include <doctest.h>

#include <cmath>
#include <numbers>

#include "platelab/error.hpp"
#include "platelab/radial_oracle.hpp"

using namespace platelab;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double j01 = 2.404825557695773;

void check_descent(const RadialResult& r, double M) {
  for (std::size_t k = 1; k < r.report.theta_history.size(); ++k) {
    CHECK(r.report.theta_history[k] <= r.report.theta_history[k - 1] * (1 + 1e-10));
  }
  for (double e : r.report.mass_errors) CHECK(e <= 1e-12 * M);
}

}  // namespace

TEST_CASE("uniform disk matches the Bessel zero") {
  const auto spec = DomainSpec::disk(1.0);
  const double W = radial_measure(spec, 1024);
  // Cells stop half a step short of the boundary node.
  CHECK(W == doctest::Approx(pi * std::pow(1 - 0.5 / 1024, 2)).epsilon(1e-12));
  const auto r = radial_optimize(spec, 1.0, 1.0, W, 1024);
  CHECK(std::abs(r.theta / std::pow(j01, 4) - 1) < 1e-3);
}

TEST_CASE("disk with a heavy core") {
  const auto spec = DomainSpec::disk(1.0);
  const double M = 1.5 * radial_measure(spec, 1024);
  const auto r = radial_optimize(spec, 1.0, 2.0, M, 1024);
  check_descent(r, M);
  REQUIRE(r.u.size() == r.r.size());
  for (std::size_t j = 1; j < r.u.size(); ++j) CHECK(r.u[j] < r.u[j - 1]);
  for (double v : r.v) CHECK(v > 0.0);

  // rho = H on [0, r*), h beyond, at most one cell in between.
  std::size_t switches = 0;
  std::size_t inside = 0;
  for (std::size_t j = 0; j < r.rho.size(); ++j) {
    inside += r.rho[j] > 1.0 && r.rho[j] < 2.0;
    if (j > 0 && r.rho[j] != r.rho[j - 1]) ++switches;
    if (j > 0) CHECK(r.rho[j] <= r.rho[j - 1]);
  }
  CHECK(r.rho.front() == 2.0);
  CHECK(r.rho.back() == 1.0);
  CHECK(inside <= 1);
  CHECK(switches <= 2);
  double m = 0.0;
  for (std::size_t j = 0; j < r.rho.size(); ++j) m += r.rho[j] * r.weights[j];
  CHECK(m == doctest::Approx(M).epsilon(1e-12));
}

TEST_CASE("agreement with the 2-D solver") {
  SUBCASE("disk") {
    const auto spec = DomainSpec::disk(1.0);
    const auto radial = radial_optimize(spec, 1.0, 2.0, 1.5 * radial_measure(spec, 1024), 1024);
    const Grid g = Grid::build(spec, 129);
    const auto planar = optimize(spec, 129, 1.0, 2.0, 1.5 * g.area());
    CHECK(std::abs(planar.pair.theta / radial.theta - 1) < 0.01);
  }
  SUBCASE("thick annulus") {
    const auto spec = DomainSpec::annulus(0.1, 1.0);
    const auto radial = radial_optimize(spec, 1.0, 2.0, 1.5 * radial_measure(spec, 1024), 1024);
    const Grid g = Grid::build(spec, 129);
    const auto planar = optimize(spec, 129, 1.0, 2.0, 1.5 * g.area());
    CHECK(std::abs(planar.pair.theta / radial.theta - 1) < 0.01);
  }
}

TEST_CASE("annulus profile is unimodal") {
  for (double a : {0.1, 0.5, 0.8}) {
    const auto spec = DomainSpec::annulus(a, 1.0);
    const double M = 1.4 * radial_measure(spec, 512);
    const auto r = radial_optimize(spec, 1.0, 2.0, M, 512);
    check_descent(r, M);
    std::size_t peaks = 0;
    for (double x : r.u) CHECK(x > 0.0);
    for (std::size_t j = 1; j + 1 < r.u.size(); ++j) peaks += r.u[j] > r.u[j - 1] && r.u[j] >= r.u[j + 1];
    CHECK(peaks == 1);
    CHECK(r.r.front() > a);
    CHECK(r.r.back() < 1.0);
  }
}

TEST_CASE("radial oracle errors") {
  CHECK_THROWS_AS(radial_optimize(DomainSpec::disk(1.0), 1.0, 2.0, 4.0, 32), InvalidInput);
  CHECK_THROWS_AS(radial_optimize(DomainSpec::ellipse(1.0, 0.6), 1.0, 2.0, 3.0, 128), InvalidInput);
  CHECK_THROWS_AS(radial_optimize(DomainSpec::disk(1.0), 1.0, 2.0, 100.0, 128), InvalidInput);
}
