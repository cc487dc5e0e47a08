#include "shallowbound/rect_moments.hpp"

#include <cmath>

namespace shallowbound {

namespace {

// Antiderivative pieces at a corner (u, v) = y - t.  L = ln(u^2+v^2),
// A = atan(v/u), B = atan(u/v), each taken as 0 where undefined; the
// combinations below are continuous across the axes.
struct Corner {
  double u, v, L, A, B;
};

Corner corner(double u, double v) {
  Corner c{u, v, 0.0, 0.0, 0.0};
  const double r2 = u * u + v * v;
  if (r2 > 0.0) c.L = std::log(r2);
  if (u != 0.0) c.A = std::atan(v / u);
  if (v != 0.0) c.B = std::atan(u / v);
  return c;
}

// Integrals of u^a v^b ln r, (a,b) in 00,10,01,20,11,02.
Moments6 log_primitive(const Corner& c) {
  const double u = c.u, v = c.v, L = c.L, A = c.A, B = c.B;
  const double u2 = u * u, v2 = v * v;
  return {
      u2 * A / 2 + u * v * L / 2 - 1.5 * u * v + v2 * B / 2,
      u2 * u * A / 3 + u2 * v * L / 4 - 7.0 * u2 * v / 12 + v2 * v * L / 12,
      u2 * u * L / 12 + u * v2 * L / 4 - 7.0 * u * v2 / 12 + v2 * v * B / 3,
      u2 * u2 * A / 4 + u2 * u * v * L / 6 - 13.0 * u2 * u * v / 36 + u * v2 * v / 12 - v2 * v2 * B / 12,
      u2 * u2 * L / 16 + u2 * v2 * L / 8 - 3.0 * u2 * v2 / 16 + v2 * v2 * L / 16,
      -u2 * u2 * A / 12 + u2 * u * v / 12 + u * v2 * v * L / 6 - 13.0 * u * v2 * v / 36 + v2 * v2 * B / 4,
  };
}

// Integrals of u^m v^n / (u^2+v^2) for m+n in {1,2,3}.
struct GradPrimitive {
  double g10, g01, g20, g11, g02, g30, g21, g12, g03;
};

GradPrimitive grad_primitive(const Corner& c) {
  const double u = c.u, v = c.v, L = c.L, A = c.A, B = c.B;
  const double u2 = u * u, v2 = v * v;
  return {
      u * A + v * L / 2,
      u * L / 2 + v * B,
      u2 * A / 2 + u * v / 2 - v2 * B / 2,
      (u2 + v2) * L / 4,
      -u2 * A / 2 + u * v / 2 + v2 * B / 2,
      u2 * u * A / 3 + u2 * v / 6 - v2 * v * L / 6,
      u2 * u * L / 6 + u * v2 / 3 - v2 * v * B / 3,
      -u2 * u * A / 3 + u2 * v / 3 + v2 * v * L / 6,
      -u2 * u * L / 6 + u * v2 / 6 + v2 * v * B / 3,
  };
}

template <class F>
auto corner_sum(const RectDomain& q, double tx, double ty, F&& f) {
  const double ua = q.x0() - tx, ub = q.x1() - tx;
  const double va = q.y0() - ty, vb = q.y1() - ty;
  auto bb = f(corner(ub, vb)), ab = f(corner(ua, vb)), ba = f(corner(ub, va)), aa = f(corner(ua, va));
  return std::array{bb, ab, ba, aa};
}

// Re-centre moments of (y - t)^alpha to moments of (y - p)^alpha.
Moments6 shift(const Moments6& m, double d1, double d2) {
  return {
      m[0],
      m[1] + d1 * m[0],
      m[2] + d2 * m[0],
      m[3] + 2.0 * d1 * m[1] + d1 * d1 * m[0],
      m[4] + d2 * m[1] + d1 * m[2] + d1 * d2 * m[0],
      m[5] + 2.0 * d2 * m[2] + d2 * d2 * m[0],
  };
}

}  // namespace

Moments6 log_moments(const RectDomain& q, double tx, double ty, double px, double py) {
  auto c = corner_sum(q, tx, ty, log_primitive);
  Moments6 m{};
  for (int k = 0; k < 6; ++k) m[k] = c[0][k] - c[1][k] - c[2][k] + c[3][k];
  return shift(m, tx - px, ty - py);
}

GradMoments grad_moments(const RectDomain& q, double tx, double ty, double px, double py) {
  auto c = corner_sum(q, tx, ty, grad_primitive);
  auto comb = [&](double GradPrimitive::*f) { return c[0].*f - c[1].*f - c[2].*f + c[3].*f; };
  const double g10 = comb(&GradPrimitive::g10), g01 = comb(&GradPrimitive::g01);
  const double g20 = comb(&GradPrimitive::g20), g11 = comb(&GradPrimitive::g11), g02 = comb(&GradPrimitive::g02);
  const double g30 = comb(&GradPrimitive::g30), g21 = comb(&GradPrimitive::g21);
  const double g12 = comb(&GradPrimitive::g12), g03 = comb(&GradPrimitive::g03);
  // (t - y) = -(u, v).
  Moments6 mx{-g10, -g20, -g11, -g30, -g21, -g12};
  Moments6 my{-g01, -g11, -g02, -g21, -g12, -g03};
  const double d1 = tx - px, d2 = ty - py;
  return {shift(mx, d1, d2), shift(my, d1, d2)};
}

}  // namespace shallowbound
