#include <algorithm>
#include <numbers>
#include <string>

#include "shallowbound/errors.hpp"
#include "shallowbound/logpotential.hpp"
#include "shallowbound/rect_moments.hpp"

namespace shallowbound {

namespace {

MomentSeries rank_one_closed_form(const RankOne& r, const GridPtr& grid, int J) {
  r.rho.validate(r.domain);
  if (!grid->domain().contains(r.domain)) throw InvalidArgument("rank-one region Q exceeds the grid domain");
  const TensorGrid& g = *grid;
  auto x = g.x();
  auto y = g.y();
  auto w = g.weights();
  cplx mean{}, ratio{};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx rw = r.rho(x[k], y[k]) * w[k];
    if (rw == cplx{}) continue;
    mean += rw;
    // Delta^{-1} chi(Q) is exact: the integral of ln|x - y| over a rectangle.
    const double pot = log_moments(r.domain, x[k], y[k], x[k], y[k])[0] / (2.0 * std::numbers::pi);
    ratio += rw * pot;
  }
  MomentSeries m;
  m.provenance = MomentProvenance::closed_form_rank_one;
  m.rank_one_scale = mean * r.domain.area();
  m.rank_one_ratio = ratio;
  m.scale = std::abs(mean) * r.domain.area();
  cplx c = m.rank_one_scale;
  for (int j = 0; j <= J; ++j) {
    m.c.push_back(c);
    c *= ratio;
  }
  return m;
}

}  // namespace

MomentSeries moment_series(const Perturbation& p, const GridPtr& grid, double eps, int J, bool force_nested) {
  if (J < 0) throw InvalidArgument("moment order J must be non-negative, got " + std::to_string(J));
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  if (p.is_rank_one() && !force_nested) return rank_one_closed_form(std::get<RankOne>(p.kind()), grid, J);

  PerturbationOperator op(p, grid, eps);
  MomentSeries m;
  m.provenance = MomentProvenance::quadrature;
  Field f = op.apply_to_one();
  m.c.push_back(integrate(f));
  {
    auto w = grid->weights();
    for (std::size_t k = 0; k < f.size(); ++k) m.scale += w[k] * std::abs(f[k]);
  }
  for (int j = 1; j <= J; ++j) {
    f = op.apply(apply_inverse_laplacian(f, grid));
    m.c.push_back(integrate(f));
  }
  if (p.is_rank_one()) {
    m.rank_one_scale = m.c[0];
    if (J >= 1 && m.c[0] != cplx{}) m.rank_one_ratio = m.c[1] / m.c[0];
  }
  return m;
}

namespace {

IdentityCheck make_check(std::string name, cplx lhs, cplx rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return {std::move(name), lhs, rhs, scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale};
}

}  // namespace

// <U> is a quadrature of a compactly supported function with finite
// smoothness, so it is zero only to this accuracy.
constexpr double kZeroMeanTolerance = 1e-4;

std::array<IdentityCheck, 3> check_identities(const PotentialSpec& u, const GridPtr& grid, int enlarge) {
  if (enlarge < 1) throw InvalidArgument("enlargement factor must be at least 1");
  Field U = sample_potential(u, grid);
  double mass = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) mass += grid->weights()[i] * std::abs(U[i]);
  if (std::abs(integrate(U)) > kZeroMeanTolerance * mass)
    throw InvalidArgument("identities need a zero-mean U");
  Field w = apply_inverse_laplacian(U, grid);
  GridPtr big = enlarge == 1 ? grid : build_enlarged_grid(*grid, enlarge);
  auto grad = grad_inverse_laplacian(U, big);
  cplx g2{};
  auto bw = big->weights();
  for (std::size_t k = 0; k < big->size(); ++k) g2 += bw[k] * (grad[0][k] * grad[0][k] + grad[1][k] * grad[1][k]);

  Field uw = U.pointwise(w);
  Field d_uw = apply_inverse_laplacian(uw, grid);
  Field uw2 = uw.pointwise(w);
  Field nested3 = U.pointwise(apply_inverse_laplacian(U.pointwise(d_uw), grid));
  return {make_check("<U D U> = -<(grad D U)^2>", integrate(uw), -g2),
          make_check("<(U D)^2 U> = <U (D U)^2>", integrate(U.pointwise(d_uw)), integrate(uw2)),
          make_check("<(U D)^3 U> = <(U D U) D (U D U)>", integrate(nested3), integrate(uw.pointwise(d_uw)))};
}

}  // namespace shallowbound
