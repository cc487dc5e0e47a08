#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "shallowbound/errors.hpp"
#include "shallowbound/predictor.hpp"
#include "shallowbound/special_functions.hpp"
#include "support.hpp"

using namespace shallowbound;

namespace {

constexpr double kPi = std::numbers::pi;

MomentSeries series(std::vector<cplx> c) {
  MomentSeries m;
  m.c = std::move(c);
  m.scale = std::abs(m.c.front());
  return m;
}

}  // namespace

TEST_CASE("M-tilde from a moment series") {
  const double C = kEulerGamma, L2 = kLn2;
  CHECK(m_tilde(series({4.0}), 0.2).real() == doctest::Approx(2 * kPi / 0.8 + C - L2));
  const cplx s = 4.0 - 0.2 * 2.0 + 0.04 * cplx(1.0, 1.0);
  CHECK(std::abs(m_tilde(series({4.0, 2.0, cplx(1.0, 1.0)}), 0.2) - (2 * kPi / (0.2 * s) + C - L2)) < 1e-14);

  MomentSeries r;
  r.provenance = MomentProvenance::closed_form_rank_one;
  r.c = {1.0};
  r.rank_one_scale = 1.0;
  r.rank_one_ratio = -0.128;
  CHECK(m_tilde(r, 0.1).real() == doctest::Approx(2 * kPi * (1.0 - 0.0128) / 0.1 + C - L2));

  CHECK_THROWS_AS(m_tilde(series({1.0, 5.0}), 0.2), DegenerateSeries);
  CHECK_THROWS_AS(m_tilde(series({1.0}), 0.0), InvalidArgument);
}

TEST_CASE("verdict bands") {
  const double eps = 0.04, band = 0.5 * 0.2;
  CHECK(classify(band + 0.01, eps) == Verdict::exists);
  CHECK(classify(band - 0.01, eps) == Verdict::indeterminate);
  CHECK(classify(-band - 0.01, eps) == Verdict::absent);
  CHECK(classify(cplx(5.0, 0.5 * kPi - band - 0.01), eps) == Verdict::exists);
  CHECK(classify(cplx(5.0, 0.5 * kPi), eps) == Verdict::indeterminate);
  CHECK(classify(cplx(5.0, -0.5 * kPi - band - 0.01), eps) == Verdict::absent);
  CHECK(classify(1.0, eps, 0.5, 1.0) == Verdict::indeterminate);
  CHECK_THROWS_AS(classify(1.0, eps, 1.0), InvalidArgument);
  CHECK_THROWS_AS(classify(1.0, eps, 0.5, -1.0), InvalidArgument);
  CHECK(std::string(to_string(Verdict::indeterminate)) == "Indeterminate");
}

TEST_CASE("leading prefactor from the Laurent inversion") {
  // p = 0: 2pi/(eps (c0 - eps c1 + ...)) = 2pi/(eps c0) + 2pi c1/c0^2 + O(eps)
  cplx sing;
  auto kappa = leading_kappa(series({4.0, 3.0, 1.0}), 0.1, &sing);
  REQUIRE(kappa);
  CHECK(std::abs(sing - 2 * kPi / 0.4) < 1e-12);
  CHECK(std::abs(*kappa - 2.0 * std::exp(-2 * kPi * 3.0 / 16.0 - kEulerGamma)) < 1e-14);
  // p = 1: c0 = 0, eps s = -eps^2 c1 + eps^3 c2 - eps^4 c3
  MomentSeries m = series({0.0, 2.0, 1.0, 0.5});
  m.scale = 1.0;
  kappa = leading_kappa(m, 0.1, &sing);
  REQUIRE(kappa);
  // 1/(-c1 eps^2 (1 - eps c2/c1 + eps^2 c3/c1)) = -(1/c1) eps^-2 (1 + eps c2/c1 + eps^2 (c2^2/c1^2 - c3/c1))
  const double e0 = -0.5, e1 = -0.25, e2 = -0.5 * (0.25 - 0.25);
  CHECK(std::abs(sing - 2 * kPi * (e0 / 0.01 + e1 / 0.1)) < 1e-10);
  CHECK(std::abs(*kappa - 2.0 * std::exp(-2 * kPi * e2 - kEulerGamma)) < 1e-14);
  CHECK_FALSE(leading_kappa(series({4.0}), 0.1));
}

TEST_CASE("vanishing series") {
  MomentSeries m = series({1e-13, 0.0});
  m.scale = 1.0;
  CHECK(series_vanishes(m));
  CHECK_FALSE(series_vanishes(series({1.0})));
}

TEST_CASE("predictions for the positive and negative bumps") {
  GridPtr g = build_grid(test::box(), 32);
  Prediction pos = predict(Perturbation(Multiplicative{test::positive_bump(), {}}), g, 0.3);
  CHECK(pos.verdict == Verdict::exists);
  CHECK(std::abs(pos.moments.c[0] - 4.0) < 1e-5);
  REQUIRE(pos.k);
  CHECK(std::abs(*pos.lambda + *pos.k * *pos.k) < 1e-18);
  REQUIRE(pos.lambda_leading);
  CHECK(pos.band == doctest::Approx(0.5 * std::sqrt(0.3)));

  Prediction neg = predict(Perturbation(Multiplicative{test::positive_bump(-16.0 / kPi), {}}), g, 0.3);
  CHECK(neg.verdict == Verdict::absent);
  CHECK_FALSE(neg.k);

  Prediction none = predict(Perturbation(Multiplicative{PotentialSpec{}, {}}), g, 0.3);
  CHECK(none.verdict == Verdict::absent);
  CHECK_THROWS_AS(predict(Perturbation(Multiplicative{test::positive_bump(), {}}), g, -0.1), InvalidArgument);
}

TEST_CASE("complex threshold of a polynomial bump") {
  GridPtr g = build_grid(test::box(), 48);
  // <v>^2 / (8 ||v||^2) = (pi/4)^2 / (8 pi/7) for (1 - r^2)^3, any amplitude
  const double t = 7.0 * kPi / 128.0;
  CHECK(complex_threshold(test::positive_bump(), g) == doctest::Approx(t).epsilon(1e-5));
  CHECK(complex_threshold(test::positive_bump(3.0), g) == doctest::Approx(t).epsilon(1e-5));
  CHECK(complex_threshold_example(test::positive_bump(), 0.5 * t, g).side == Verdict::exists);
  CHECK(complex_threshold_example(test::positive_bump(), 2.0 * t, g).side == Verdict::absent);
  CHECK_THROWS_AS(complex_threshold(test::positive_bump(cplx(1.0, 1.0)), g), InvalidArgument);
}

TEST_CASE("divergence terms leave M-tilde alone only when they are rotational") {
  GridPtr g = build_grid(test::box(), 32);
  const Perturbation bare(Multiplicative{test::positive_bump(), {}});
  const PotentialSpec f = PotentialSpec::polynomial_bump(0.5, 0.0, 0.0, 1.0, 10.0);
  DivergenceForm rot;
  rot.a[0][1] = f;
  rot.a[1][0] = f.scaled(-1.0);
  rot.b[0] = f.with_op(TermOp::y_times).scaled(-1.0);
  rot.b[1] = f.with_op(TermOp::x_times);
  rot.zero_order = Multiplicative{test::positive_bump(), {}};
  DivergenceForm sym;
  sym.a[0][0] = f;
  sym.a[1][1] = f;
  sym.zero_order = Multiplicative{test::positive_bump(), {}};
  const double eps = 0.3;
  const cplx m0 = m_tilde(moment_series(bare, g, eps, 3), eps);
  CHECK(test::rel_err(m_tilde(moment_series(Perturbation(rot), g, eps, 3), eps), m0) < 1e-10);
  CHECK(test::rel_err(m_tilde(moment_series(Perturbation(sym), g, eps, 3), eps), m0) > 1e-3);
}

TEST_CASE("Exists predictions map M-tilde to k and lambda exactly") {
  GridPtr g = build_grid(test::box(), 24);
  const Perturbation p(Multiplicative{test::positive_bump(), {}});
  for (double eps : {0.3, 0.2, 0.1, 0.05}) {
    const Prediction pr = predict(p, g, eps);
    REQUIRE(pr.verdict == Verdict::exists);
    const cplx k = std::exp(-pr.m_tilde);
    CHECK(*pr.k == k);
    CHECK(*pr.lambda == -(k * k));
  }
}

TEST_CASE("Re M-tilde decreases with eps for a positive mean") {
  GridPtr g = build_grid(test::box(), 24);
  const Perturbation p(Multiplicative{test::positive_bump(), {}});
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double eps = 0.01 + i * (0.3 - 0.01) / 9.0;
    const double m = predict(p, g, eps).m_tilde.real();
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("truncation differences scale like eps^J") {
  // M_J - M_{J+1} = 2pi (-eps)^J c_{J+1} / (s_J s_{J+1}), so on a log-log fit
  // the slope is J and the fitted K absorbs c_{J+1} / c_0^2
  GridPtr g = build_grid(test::box(), 32);
  const Perturbation p(Multiplicative{test::positive_bump(), {}});
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
  for (int J = 1; J <= 3; ++J) {
    std::vector<double> d;
    for (double e : eps) {
      const MomentSeries full = moment_series(p, g, e, J + 1);
      MomentSeries cut = full;
      cut.c.pop_back();
      d.push_back(std::abs(m_tilde(cut, e) - m_tilde(full, e)));
    }
    const double K = d.front() / std::pow(eps.front(), J);
    for (std::size_t i = 1; i < d.size(); ++i) {
      CHECK(d[i] <= 1.2 * K * std::pow(eps[i], J));
      CHECK(std::log(d[i - 1] / d[i]) / std::log(2.0) == doctest::Approx(J).epsilon(0.1));
    }
  }
}

TEST_CASE("classification commutes with conjugation") {
  GridPtr g = build_grid(test::box(), 24);
  for (cplx a : {cplx(5.0, 0.3), cplx(5.0, -2.0), cplx(-5.0, 0.1), cplx(0.1, 4.0)}) {
    const Perturbation p(Multiplicative{test::positive_bump(a), {}});
    const Perturbation q(Multiplicative{test::positive_bump(std::conj(a)), {}});
    for (double eps : {0.3, 0.1}) {
      const Prediction pp = predict(p, g, eps), pq = predict(q, g, eps);
      CHECK(pp.verdict == pq.verdict);
      CHECK(std::abs(pp.m_tilde - std::conj(pq.m_tilde)) <= 1e-12 * std::abs(pp.m_tilde));
      CHECK(classify(std::conj(pp.m_tilde), eps) == pp.verdict);
    }
  }
}
