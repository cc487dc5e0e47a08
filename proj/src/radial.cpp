#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shallowbound/errors.hpp"
#include "shallowbound/radial.hpp"
#include "shallowbound/special_functions.hpp"

namespace shallowbound {

namespace {

struct Shot {
  double u, du;   // u and u_r at the support radius
  double k0, dk0; // K0(kR) and d/dz K0 at z = kR
};

// Central difference with one Richardson step.
double k0_derivative(double z) {
  auto k0 = [](double t) { return bessel_k0(cplx(t, 0.0)).real(); };
  const double h = 1e-3 * std::max(1.0, z) * std::min(1.0, z);
  const double d1 = (k0(z + h) - k0(z - h)) / (2.0 * h);
  const double d2 = (k0(z + 0.5 * h) - k0(z - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

Shot shoot(const PotentialSpec& v, double eps, double k, const RadialOptions& opt) {
  const double R = v.support_radius();
  if (!(R > opt.r_start)) throw InvalidArgument("support radius must exceed the start radius");
  const double s0 = std::log(opt.r_start), s1 = std::log(R);
  const double h = (s1 - s0) / opt.steps;
  auto rhs = [&](double s, double u, double us, double& du, double& dus) {
    const double r = std::exp(s);
    du = us;
    dus = r * r * (k * k - eps * v.radial(r).real()) * u;
  };
  // Regular series start u = 1 + (k^2 - eps V(0)) r^2 / 4.
  const double r0 = opt.r_start;
  const double c = (k * k - eps * v.radial(0.0).real()) / 4.0;
  double u = 1.0 + c * r0 * r0, us = 2.0 * c * r0 * r0, s = s0;
  for (int i = 0; i < opt.steps; ++i) {
    double a1, b1, a2, b2, a3, b3, a4, b4;
    rhs(s, u, us, a1, b1);
    rhs(s + 0.5 * h, u + 0.5 * h * a1, us + 0.5 * h * b1, a2, b2);
    rhs(s + 0.5 * h, u + 0.5 * h * a2, us + 0.5 * h * b2, a3, b3);
    rhs(s + h, u + h * a3, us + h * b3, a4, b4);
    u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    us += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    s = s0 + (i + 1) * h;
  }
  return {u, us / R, bessel_k0(cplx(k * R, 0.0)).real(), k0_derivative(k * R)};
}

// Wronskian of u with the decaying exterior solution; same zeros as the
// mismatch but free of poles where u vanishes.
double wronskian(const Shot& s, double k) { return s.du * s.k0 - s.u * k * s.dk0; }

}  // namespace

const PotentialSpec& radial_potential(const Perturbation& p) {
  if (!p.is_multiplicative()) throw UnsupportedOracle("radial oracle handles multiplicative perturbations only");
  const auto& m = std::get<Multiplicative>(p.kind());
  if (m.v1) throw UnsupportedOracle("radial oracle does not handle an eps-dependent part V1");
  if (!m.v.is_real()) throw UnsupportedOracle("radial oracle needs a real potential");
  if (!m.v.is_radial()) throw UnsupportedOracle("radial oracle needs a radially symmetric potential");
  return m.v;
}

double matching_mismatch(const PotentialSpec& v, double eps, double k, const RadialOptions& opt) {
  if (!(k > 0.0)) throw InvalidArgument("matching needs k > 0");
  if (opt.steps < 10) throw InvalidArgument("too few integration steps");
  Shot s = shoot(v, eps, k, opt);
  if (s.u == 0.0) return std::copysign(std::numeric_limits<double>::infinity(), s.du);
  return s.du / s.u - k * s.dk0 / s.k0;
}

RadialResult radial_bound_state(const Perturbation& p, double eps, double k_lo, double k_hi,
                                const RadialOptions& opt) {
  const PotentialSpec& v = radial_potential(p);
  if (!(k_lo > 0.0 && k_lo < k_hi)) throw InvalidArgument("bracket must satisfy 0 < k_lo < k_hi");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  double a = std::log(k_lo), b = std::log(k_hi);
  double fa = wronskian(shoot(v, eps, k_lo, opt), k_lo);
  const double fb = wronskian(shoot(v, eps, k_hi, opt), k_hi);
  if (!(fa * fb < 0.0))
    throw NoBoundStateInBracket("no sign change of the matching condition on [" + std::to_string(k_lo) + ", " +
                                std::to_string(k_hi) + "]");
  RadialResult r;
  while (b - a > opt.rel_tol) {
    const double m = 0.5 * (a + b);
    const double fm = wronskian(shoot(v, eps, std::exp(m), opt), std::exp(m));
    ++r.bisections;
    if (fm == 0.0) {
      a = b = m;
      break;
    }
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  r.k = std::exp(0.5 * (a + b));
  r.lambda = -r.k * r.k;
  r.mismatch = matching_mismatch(v, eps, r.k, opt);
  return r;
}

}  // namespace shallowbound
