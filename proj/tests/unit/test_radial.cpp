#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "shallowbound/errors.hpp"
#include "shallowbound/radial.hpp"
#include "support.hpp"

using namespace shallowbound;

namespace {

// Disk well eps V0 on r < a: J0 inside, K0 outside.  Returns the bound
// state's k by bisection of the exact matching condition.
double disk_well_k(double depth, double a) {
  auto f = [&](double k) {
    const double q = std::sqrt(depth - k * k);
    return -q * std::cyl_bessel_j(1.0, q * a) / std::cyl_bessel_j(0.0, q * a) +
           k * std::cyl_bessel_k(1.0, k * a) / std::cyl_bessel_k(0.0, k * a);
  };
  double lo = 1e-6, hi = std::sqrt(depth) * 0.999;
  REQUIRE(f(lo) * f(hi) < 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

TEST_CASE("disk well against the Bessel matching condition") {
  const double v0 = 2.0, eps = 0.5, a = 1.0;
  Perturbation p(Multiplicative{PotentialSpec::disk(v0, 0.0, 0.0, a), {}});
  RadialResult r = radial_bound_state(p, eps, 1e-6, 0.9);
  const double k = disk_well_k(eps * v0, a);
  CHECK(r.k == doctest::Approx(k).epsilon(1e-7));
  CHECK(r.lambda == doctest::Approx(-k * k).epsilon(2e-7));
  CHECK(r.bisections > 0);
}

TEST_CASE("without a potential the matching mismatch is positive") {
  for (double k : {1e-4, 0.01, 0.3, 2.0})
    CHECK(matching_mismatch(test::positive_bump(), 0.0, k) > 0.0);
}

TEST_CASE("RK4 in ln r converges at fourth order") {
  const PotentialSpec v = test::positive_bump();
  auto at = [&](int steps) {
    RadialOptions o;
    o.steps = steps;
    return matching_mismatch(v, 0.4, 0.05, o);
  };
  const double ref = at(64000);
  const double e1 = std::abs(at(1000) - ref), e2 = std::abs(at(2000) - ref);
  CHECK(e2 < e1);
  CHECK(e1 / e2 > 10.0);
}

TEST_CASE("oracle applicability and failures") {
  GridPtr g = build_grid(test::box(), 8);
  CHECK_THROWS_AS(radial_potential(Perturbation(RankOne{test::positive_bump(), test::box()})), UnsupportedOracle);
  CHECK_THROWS_AS(radial_potential(Perturbation(Multiplicative{test::positive_bump(cplx(1.0, 0.5)), {}})),
                  UnsupportedOracle);
  CHECK_THROWS_AS(radial_potential(Perturbation(Multiplicative{test::positive_bump(), test::positive_bump()})),
                  UnsupportedOracle);
  PotentialSpec offset = PotentialSpec::polynomial_bump(1.0, 0.1, 0.0, 1.0, 3.0);
  CHECK_THROWS_AS(radial_potential(Perturbation(Multiplicative{test::positive_bump() + offset, {}})), UnsupportedOracle);
  CHECK_THROWS_AS(radial_bound_state(Perturbation(Multiplicative{test::positive_bump(-5.0), {}}), 0.4, 1e-6),
                  NoBoundStateInBracket);
}

TEST_CASE("halving the radial step barely moves k") {
  const Perturbation p(Multiplicative{test::positive_bump(), {}});
  RadialOptions o;
  o.rel_tol = 1e-13;
  const double k1 = radial_bound_state(p, 0.4, 1e-6, 0.5, o).k;
  o.steps *= 2;
  const double k2 = radial_bound_state(p, 0.4, 1e-6, 0.5, o).k;
  CHECK(std::abs(k1 - k2) <= 1e-8 * k2);
}

TEST_CASE("Richardson fit of the radial integration order") {
  const PotentialSpec v = PotentialSpec::polynomial_bump(16.0 / std::numbers::pi, 0.0, 0.0, 1.0, 8.0);
  auto at = [&](int steps) {
    RadialOptions o;
    o.steps = steps;
    return matching_mismatch(v, 0.4, 0.05, o);
  };
  const double a = at(500), b = at(1000), c = at(2000);
  CHECK(std::log2((a - b) / (b - c)) >= 3.5);
}

TEST_CASE("radial and planar quadrature agree on the mean") {
  const PotentialSpec v = PotentialSpec::polynomial_bump(16.0 / std::numbers::pi, 0.0, 0.0, 1.0, 8.0);
  const double exact = 2.0 * std::numbers::pi * 16.0 / std::numbers::pi / 18.0;
  const GaussRule q = gauss_legendre(40);
  double radial = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double r = 0.5 * (q.nodes[i] + 1.0);
    radial += 0.5 * q.weights[i] * 2.0 * std::numbers::pi * r * v.radial(r).real();
  }
  CHECK(std::abs(radial - exact) < 1e-12);
  const cplx planar = integrate(sample_potential(v, build_grid(test::box(1.0), 64)));
  CHECK(std::abs(planar - radial) < 1e-8 * radial);
}
