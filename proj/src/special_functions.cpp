#include "shallowbound/special_functions.hpp"

#include <cmath>
#include <string>

#include "shallowbound/errors.hpp"

namespace shallowbound {

namespace {

using lcplx = std::complex<long double>;
constexpr long double kGammaL = 0.577215664901532860606512090082402431L;
constexpr long double kLn2L = 0.693147180559945309417232121458176568L;
constexpr double kPi = std::numbers::pi;

// S1 - 1 = sum_{j>=1} t^j/(j!)^2 and S2 = sum_{j>=0} t^j psi(j+1)/(j!)^2,
// t = z^2/4.
struct SeriesParts {
  lcplx s1m1;
  lcplx s2;
};

SeriesParts series_parts(cplx z) {
  const lcplx t = lcplx(z) * lcplx(z) / 4.0L;
  lcplx term = 1.0L;
  long double psi = -kGammaL;
  lcplx s1m1 = 0.0L, s2 = psi;
  for (int j = 1; j < 500; ++j) {
    term *= t / (static_cast<long double>(j) * j);
    psi += 1.0L / j;
    s1m1 += term;
    lcplx d = term * psi;
    s2 += d;
    if (std::abs(term) <= 1e-21L * (1.0L + std::abs(s1m1)) && std::abs(d) <= 1e-21L * std::abs(s2)) break;
  }
  return {s1m1, s2};
}

void require_off_cut(cplx z) {
  if (z == cplx(0.0, 0.0)) throw DomainError("K0 is singular at z = 0");
  if (z.imag() == 0.0 && z.real() < 0.0)
    throw DomainError("K0 argument on the branch cut: " + std::to_string(z.real()));
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("K0 argument not finite");
}

}  // namespace

double digamma_nat(int n) {
  if (n < 1) throw InvalidArgument("digamma_nat needs n >= 1, got " + std::to_string(n));
  long double s = -kGammaL;
  for (int j = 1; j < n; ++j) s += 1.0L / j;
  return static_cast<double>(s);
}

cplx bessel_i0(cplx z) {
  const lcplx t = lcplx(z) * lcplx(z) / 4.0L;
  lcplx term = 1.0L, s = 1.0L;
  for (int j = 1; j < 2000; ++j) {
    term *= t / (static_cast<long double>(j) * j);
    s += term;
    if (std::abs(term) <= 1e-21L * std::abs(s) && static_cast<long double>(j) * j > std::abs(t)) break;
  }
  return cplx(s);
}

cplx bessel_k0_series(cplx z) {
  require_off_cut(z);
  SeriesParts p = series_parts(z);
  lcplx lz = std::log(lcplx(z)) - kLn2L;
  return cplx(-lz * (1.0L + p.s1m1) + p.s2);
}

cplx bessel_k0_continued_fraction(cplx z) {
  require_off_cut(z);
  cplx b = 2.0 * (1.0 + z);
  cplx d = 1.0 / b;
  cplx h = d, delh = d;
  cplx q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  cplx q = a1, c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  for (int i = 2; i < 20000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / static_cast<double>(i);
    cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s)) break;
  }
  return std::sqrt(kPi / (2.0 * z)) * std::exp(-z) / s;
}

cplx bessel_k0_asymptotic(cplx z) {
  require_off_cut(z);
  cplx term = 1.0, sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 80; ++k) {
    const double m = (2.0 * k - 1.0);
    cplx next = term * (-(m * m) / (8.0 * k)) / z;
    double mag = std::abs(next);
    if (mag > prev) break;
    term = next;
    sum += term;
    prev = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(kPi / (2.0 * z)) * std::exp(-z) * sum;
}

cplx bessel_k0(cplx z) {
  require_off_cut(z);
  const double r = std::abs(z);
  if (r <= kK0SeriesRadius) return bessel_k0_series(z);
  if (r >= kK0AsymptoticRadius) return bessel_k0_asymptotic(z);
  if (z.real() >= 0.0) return bessel_k0_continued_fraction(z);
  // K0(z) = K0(-z) -+ i pi I0(z), upper sign for Im z > 0.
  const cplx ipi(0.0, kPi);
  cplx k = bessel_k0_continued_fraction(-z);
  return z.imag() > 0.0 ? k - ipi * bessel_i0(z) : k + ipi * bessel_i0(z);
}

cplx k0_plus_log(cplx z) {
  if (std::abs(z) <= kK0SeriesRadius) {
    if (z.imag() == 0.0 && z.real() < 0.0) throw DomainError("k0_plus_log argument on the branch cut");
    SeriesParts p = series_parts(z);
    lcplx lz = (z == cplx(0.0, 0.0)) ? lcplx(0.0L) : std::log(lcplx(z));
    return cplx(-lz * p.s1m1 + kLn2L * (1.0L + p.s1m1) + p.s2);
  }
  return bessel_k0(z) + std::log(z);
}

}  // namespace shallowbound
