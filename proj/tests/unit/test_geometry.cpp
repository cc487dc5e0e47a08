#include <doctest.h>

#include <cmath>
#include <random>

#include "shallowbound/errors.hpp"
#include "shallowbound/geometry.hpp"
#include "shallowbound/potential.hpp"
#include "support.hpp"

using namespace shallowbound;

TEST_CASE("rectangle basics") {
  RectDomain q(-1.0, 3.0, 0.0, 2.0);
  CHECK(q.area() == 8.0);
  CHECK(q.diameter() == doctest::Approx(std::sqrt(20.0)));
  CHECK(q.contains(3.0, 2.0));
  CHECK_FALSE(q.contains(3.1, 1.0));
  CHECK(q.center() == std::pair{1.0, 1.0});
  CHECK(q.clamp(5.0, -1.0) == std::pair{3.0, 0.0});
  CHECK(q.distance_to(6.0, 6.0) == doctest::Approx(5.0));
  CHECK(q.scaled(3.0) == RectDomain(-5.0, 7.0, -2.0, 4.0));
  CHECK(q.scaled(3.0).contains(q));
  CHECK_THROWS_AS(RectDomain(1.0, 1.0, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(RectDomain(0.0, 1.0, 0.0, NAN), InvalidArgument);
}

TEST_CASE("Gauss-Legendre is exact to degree 2n - 1") {
  for (int n : {2, 5, 16, 64}) {
    GaussRule g = gauss_legendre(n);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(n));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
    CHECK(std::is_sorted(g.nodes.begin(), g.nodes.end()));
  }
  CHECK_THROWS_AS(gauss_legendre(0), InvalidArgument);
}

TEST_CASE("tensor grid integrates, differentiates and interpolates polynomials") {
  GridPtr g = build_grid({0.0, 2.0, -1.0, 1.0}, 12);
  CHECK(g->is_spectral());
  CHECK_FALSE(g->is_lattice());
  Field f(g);
  Field fx(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->x()[i], y = g->y()[i];
    f[i] = x * x * x * y * y + cplx(0.0, x);
    fx[i] = 3.0 * x * x * y * y + cplx(0.0, 1.0);
  }
  // int_0^2 x^3 dx int_-1^1 y^2 dy = 4 * 2/3, imaginary part int x = 2 * 2
  CHECK(std::abs(integrate(f) - cplx(8.0 / 3.0, 4.0)) < 1e-13);
  Field d = differentiate(f, 0);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(d[i] - fx[i]) < 1e-10);
  CHECK(std::abs(interpolate(f, 0.3, 0.7) - cplx(0.027 * 0.49, 0.3)) < 1e-12);
  Jet j = interpolate_jet(f, 1.5, -0.5);
  CHECK(std::abs(j.dxy - 2.0 * 3.0 * 2.25 * -0.5) < 1e-10);
  CHECK(std::abs(j.dyy - 2.0 * 3.375) < 1e-10);
}

TEST_CASE("nodal jets match interpolated jets") {
  GridPtr g = build_grid({-1.0, 1.0, -1.0, 1.0}, 9);
  Field f(g);
  for (std::size_t i = 0; i < g->size(); ++i) f[i] = std::exp(g->x()[i]) * std::cos(g->y()[i]);
  auto jets = nodal_jets(f);
  for (std::size_t i = 0; i < g->size(); i += 7) {
    Jet a = interpolate_jet(f, g->x()[i], g->y()[i]);
    CHECK(std::abs(a.dxx - jets[i].dxx) < 1e-9);
    CHECK(std::abs(a.dxy - jets[i].dxy) < 1e-9);
  }
}

TEST_CASE("enlarged grid keeps the base nodes") {
  GridPtr g = build_grid(test::box(), 10);
  GridPtr big = build_enlarged_grid(*g, 3);
  CHECK(big->domain() == g->domain().scaled(3.0));
  CHECK(big->size() == 9 * g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    auto k = big->find_node(g->x()[i], g->y()[i]);
    REQUIRE(k);
    CHECK(big->weights()[*k] == g->weights()[i]);
  }
  double area = 0.0;
  for (double w : big->weights()) area += w;
  CHECK(area == doctest::Approx(big->domain().area()));
  CHECK_THROWS_AS(build_enlarged_grid(*g, 2), InvalidArgument);
}

TEST_CASE("midpoint lattice") {
  GridPtr l = build_lattice({0.0, 1.0, 0.0, 2.0}, 4);
  CHECK(l->is_lattice());
  CHECK(l->x()[0] == doctest::Approx(0.125));
  CHECK(l->max_spacing() == doctest::Approx(0.5));
  CHECK(integrate(Field::constant(l, 1.0)).real() == doctest::Approx(2.0));
  CHECK_THROWS_AS(l->diff_x(), InvalidArgument);
}

TEST_CASE("fields on different grids do not mix") {
  GridPtr a = build_grid(test::box(), 4), b = build_grid(test::box(), 5);
  Field fa = Field::constant(a, 1.0), fb = Field::constant(b, 1.0);
  CHECK_THROWS_AS(fa += fb, InvalidArgument);
  CHECK_THROWS_AS(build_grid(test::box(), 1), InvalidArgument);
  Field s = (2.0 * fa).pointwise(fa);
  CHECK(s[0] == cplx(2.0));
  CHECK(l2_norm(fa) == doctest::Approx(2.4));
}

TEST_CASE("integration is linear") {
  GridPtr g = build_grid(test::box(), 20);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Field f(g), h(g);
    for (std::size_t i = 0; i < g->size(); ++i) {
      f[i] = cplx(n(rng), n(rng));
      h[i] = cplx(n(rng), n(rng));
    }
    const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
    const cplx lhs = integrate(a * f + b * h), rhs = a * integrate(f) + b * integrate(h);
    double mag = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) mag += g->weights()[i] * (std::abs(a * f[i]) + std::abs(b * h[i]));
    CHECK(std::abs(lhs - rhs) <= 1e-13 * mag);
  }
}

TEST_CASE("weights are positive and sum to the area") {
  const RectDomain q(-0.7, 1.9, 0.2, 1.0);
  GridPtr base = build_grid(q, 13);
  for (const GridPtr& g : {base, build_enlarged_grid(*base, 3), build_enlarged_grid(*base, 5), build_lattice(q, 17)}) {
    double s = 0.0;
    for (double w : g->weights()) {
      CHECK(w > 0.0);
      s += w;
    }
    CHECK(s == doctest::Approx(g->domain().area()).epsilon(1e-12));
  }
}

TEST_CASE("bump integrals converge under refinement") {
  const PotentialSpec bump = PotentialSpec::polynomial_bump(1.0, 0.1, 0.0, 0.9, 6.0);
  const PotentialSpec cosine = PotentialSpec::cosine_bump(1.0, 0.0, -0.2, 0.8);
  for (const auto& spec : {bump, cosine}) {
    std::vector<cplx> m;
    for (int n : {8, 16, 32, 64, 128}) m.push_back(integrate(sample_potential(spec, build_grid(test::box(), n))));
    for (std::size_t i = 2; i < m.size(); ++i) CHECK(std::abs(m[i] - m[i - 1]) < 0.5 * std::abs(m[i - 1] - m[i - 2]));
  }
}
