#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "shallowbound/errors.hpp"
#include "shallowbound/logpotential.hpp"
#include "support.hpp"

using namespace shallowbound;
using test::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

// Delta^{-1} (1 - r^2)^4 on the unit disk, in closed form.
double bump4_potential(double r) {
  if (r >= 1.0) return 0.1 * std::log(r);
  const double s = r * r;
  const double p = 2.5 * s - 2.5 * s * s + (5.0 / 3.0) * s * s * s - 0.625 * s * s * s * s + 0.1 * s * s * s * s * s;
  return -0.1141666666666666667 + 0.1 * p;
}

double bump4_slope(double r) {
  const double s = r * r;
  const double g = r >= 1.0 ? 0.1 : (1.0 - std::pow(1.0 - s, 5)) / 10.0;
  return g / r;
}

PotentialSpec bump4() { return PotentialSpec::polynomial_bump(1.0, 0.0, 0.0, 1.0, 4.0); }

}  // namespace

TEST_CASE("inverse Laplacian of a radial bump against the closed form") {
  GridPtr g = build_grid(test::box(), 40);
  Field f = sample_potential(bump4(), g);
  const std::vector<double> tx = {0.0, 0.3, -0.55, 0.9, 1.1, 2.0, -3.0};
  const std::vector<double> ty = {0.0, 0.1, 0.4, -0.2, 0.0, 1.5, 0.25};
  auto u = inverse_laplacian_at(f, tx, ty);
  for (std::size_t i = 0; i < tx.size(); ++i)
    CHECK_MESSAGE(std::abs(u[i] - bump4_potential(std::hypot(tx[i], ty[i]))) < 1e-7, "at (" << tx[i] << ", " << ty[i] << ")");
}

TEST_CASE("inverse Laplacian undoes the Laplacian of a compact bump") {
  PotentialSpec v = PotentialSpec::polynomial_bump(2.0, 0.1, -0.15, 0.9, 8.0);
  auto worst = [&](int n) {
    GridPtr g = build_grid(test::box(), n);
    Field back = apply_inverse_laplacian(sample_potential(v.with_op(TermOp::laplacian), g), g);
    Field ref = sample_potential(v, g);
    double w = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) w = std::max(w, std::abs(back[i] - ref[i]));
    return w;
  };
  const double coarse = worst(32), fine = worst(56);
  CHECK(fine < 1e-5);
  CHECK(fine < 0.1 * coarse);
}

TEST_CASE("dense inverse Laplacian matrix agrees with the matrix-free version") {
  GridPtr g = build_grid(test::box(), 16);
  Field f = sample_potential(bump4(), g);
  Eigen::MatrixXd m = inverse_laplacian_matrix(g);
  Field u = apply_inverse_laplacian(f, g);
  Eigen::VectorXcd fv(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i) fv(static_cast<Eigen::Index>(i)) = f[i];
  Eigen::VectorXcd mu = m.cast<cplx>() * fv;
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(mu(static_cast<Eigen::Index>(i)) - u[i]) < 1e-12);
  CHECK_THROWS_AS(inverse_laplacian_matrix(build_lattice(test::box(), 8)), InvalidArgument);
}

TEST_CASE("gradient of the inverse Laplacian") {
  GridPtr g = build_grid(test::box(), 40);
  GridPtr t = build_grid({-1.5, 1.5, -1.5, 1.5}, 7);
  Field f = sample_potential(bump4(), g);
  auto grad = grad_inverse_laplacian(f, t);
  for (std::size_t i = 0; i < t->size(); ++i) {
    const double x = t->x()[i], y = t->y()[i], r = std::hypot(x, y);
    if (r == 0.0) continue;
    const double s = bump4_slope(r);
    CHECK(std::abs(grad[0][i] - s * x / r) < 1e-5);
    CHECK(std::abs(grad[1][i] - s * y / r) < 1e-5);
  }
}

TEST_CASE("perturbation operators") {
  GridPtr g = build_grid(test::box(), 24);
  Field h(g);
  for (std::size_t i = 0; i < g->size(); ++i) h[i] = cplx(std::cos(g->x()[i]), g->y()[i]);

  SUBCASE("multiplicative with an eps-dependent part") {
    Perturbation p(Multiplicative{test::positive_bump(), bump4()});
    PerturbationOperator op(p, g, 0.25);
    Field lh = op.apply(h);
    Field v = sample_potential(test::positive_bump(), g), v1 = sample_potential(bump4(), g);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(lh[i] - (v[i] + 0.25 * v1[i]) * h[i]) < 1e-14);
    for (std::size_t k : op.active_rows()) CHECK(std::hypot(g->x()[k], g->y()[k]) < 1.0);
  }
  SUBCASE("rank one") {
    RectDomain q(-0.5, 0.5, -0.5, 0.5);
    Perturbation p(RankOne{PotentialSpec::polynomial_bump(1.0, 0.0, 0.0, 0.5, 2.0), q});
    PerturbationOperator op(p, g, 0.1);
    Field lh = op.apply(h);
    Field rho = sample_potential(PotentialSpec::polynomial_bump(1.0, 0.0, 0.0, 0.5, 2.0), g);
    const cplx m = integrate(rho.pointwise(h));
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(lh[i] - (q.contains(g->x()[i], g->y()[i]) ? m : 0.0)) < 1e-14);
  }
  SUBCASE("divergence terms integrate to zero") {
    DivergenceForm d;
    d.a[0][1] = PotentialSpec::polynomial_bump(0.5, 0.0, 0.0, 1.0, 8.0);
    d.a[1][0] = PotentialSpec::polynomial_bump(-0.3, 0.0, 0.0, 1.0, 8.0);
    d.a[0][0] = PotentialSpec::polynomial_bump(0.2, 0.1, 0.0, 0.9, 8.0);
    d.b[0] = PotentialSpec::polynomial_bump(0.4, 0.0, 0.0, 1.0, 8.0).with_op(TermOp::y_times);
    d.zero_order = Multiplicative{test::positive_bump(), {}};
    Perturbation p(d);
    PerturbationOperator op(p, g, 0.1);
    Field zero = sample_potential(test::positive_bump(), g).pointwise(h);
    CHECK(std::abs(integrate(op.apply(h)) - integrate(zero)) < 1e-12);
    CHECK(op.active_rows().size() == g->size());
  }
  SUBCASE("coefficients must live inside the domain") {
    Perturbation p(Multiplicative{PotentialSpec::polynomial_bump(1.0, 1.0, 0.0, 1.0, 3.0), {}});
    CHECK_THROWS_AS(PerturbationOperator(p, g, 0.1), InvalidArgument);
  }
}

TEST_CASE("first moments against radial quadrature") {
  GridPtr g = build_grid(test::box(), 40);
  Perturbation p(Multiplicative{bump4(), {}});
  MomentSeries m = moment_series(p, g, 0.1, 1);
  CHECK(std::abs(m.c[0] - kPi / 5.0) < 1e-7);
  // c_1 = <V Delta^{-1} V> = 2 pi int_0^1 (1 - r^2)^4 u(r) r dr
  const GaussRule r = gauss_legendre(40);
  double c1 = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double s = 0.5 * (r.nodes[i] + 1.0);
    c1 += 0.5 * r.weights[i] * 2.0 * kPi * std::pow(1.0 - s * s, 4) * bump4_potential(s) * s;
  }
  CHECK(std::abs(m.c[1] - c1) < 1e-8);
  CHECK(m.provenance == MomentProvenance::quadrature);
  CHECK(m.scale == doctest::Approx(kPi / 5.0));
}

TEST_CASE("rank-one moments: closed form against nested quadrature") {
  GridPtr g = build_grid({0.0, 1.0, 0.0, 1.0}, 32);
  auto table = std::make_shared<SampleTable>(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0},
                                             std::vector<cplx>(4, 1.0));
  Perturbation p(RankOne{PotentialSpec::tabulated(table), {0.0, 1.0, 0.0, 1.0}});
  MomentSeries closed = moment_series(p, g, 0.1, 3);
  MomentSeries nested = moment_series(p, g, 0.1, 3, true);
  CHECK(closed.provenance == MomentProvenance::closed_form_rank_one);
  for (int j = 0; j <= 3; ++j) CHECK(rel_err(closed.c[j], nested.c[j]) < 1e-8);
  // <rho Delta^{-1} chi> over the unit square is the mean log distance / 2 pi
  CHECK(std::abs(closed.rank_one_ratio - (-0.80508672195008715070670816509) / (2.0 * kPi)) < 1e-9);
}

TEST_CASE("bilinear identities for a zero-mean potential") {
  GridPtr g = build_grid(test::box(), 64);
  PotentialSpec u = PotentialSpec::polynomial_bump(1.5, 0.1, -0.05, 0.9, 8.0).with_op(TermOp::laplacian);
  auto checks = check_identities(u, g, 3);
  for (const auto& c : checks) CHECK_MESSAGE(c.relative < 1e-6, c.name << ": " << c.lhs << " vs " << c.rhs);
  CHECK_THROWS_AS(check_identities(test::positive_bump(), g, 3), InvalidArgument);
}

TEST_CASE("real perturbations have real moments") {
  GridPtr g = build_grid(test::box(), 24);
  const PotentialSpec v = test::positive_bump() + PotentialSpec::cosine_bump(-2.0, 0.3, -0.2, 0.5);
  const Perturbation p(Multiplicative{v, PotentialSpec::polynomial_bump(1.5, -0.2, 0.1, 0.6, 4.0)});
  const MomentSeries m = moment_series(p, g, 0.2, 4);
  for (cplx c : m.c) CHECK(std::abs(c.imag()) <= 1e-12 * std::abs(c));
}

TEST_CASE("rotational divergence terms do not change the moments") {
  GridPtr g = build_grid(test::box(), 32);
  const PotentialSpec f = PotentialSpec::polynomial_bump(0.7, 0.0, 0.0, 1.0, 10.0);
  DivergenceForm d;
  d.a[0][1] = f;
  d.a[1][0] = f.scaled(-1.0);
  d.b[0] = f.with_op(TermOp::y_times).scaled(-1.0);
  d.b[1] = f.with_op(TermOp::x_times);
  d.zero_order = Multiplicative{test::positive_bump(), {}};
  const MomentSeries bare = moment_series(Perturbation(Multiplicative{test::positive_bump(), {}}), g, 0.2, 3);
  const MomentSeries div = moment_series(Perturbation(d), g, 0.2, 3);
  for (int j = 0; j <= 3; ++j) CHECK(test::rel_err(div.c[j], bare.c[j]) < 1e-8);
}

TEST_CASE("bound constant defaults to the coefficient sizes") {
  const PotentialSpec v = test::positive_bump(), v1 = PotentialSpec::disk(-2.0, 0.0, 0.0, 0.5);
  const Perturbation p(Multiplicative{v, v1});
  CHECK(p.bound_constant() == doctest::Approx(v.sup_norm() + v1.sup_norm()));
  CHECK(Perturbation(Multiplicative{v, {}}, 7.5).bound_constant() == 7.5);
  CHECK_THROWS_AS(Perturbation(Multiplicative{v, {}}, -1.0), InvalidArgument);
}
