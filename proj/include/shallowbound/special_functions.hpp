#pragma once

#include <complex>
#include <numbers>

namespace shallowbound {

using cplx = std::complex<double>;

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kLn2 = std::numbers::ln2;

struct Constants {
  double euler_gamma;
  double ln2;
};
inline constexpr Constants constants{kEulerGamma, kLn2};

/// K0 regions: power series for |z| <= kK0SeriesRadius, Steed/Temme
/// continued fraction (or analytic continuation through I0 when Re z < 0)
/// up to kK0AsymptoticRadius, asymptotic expansion beyond.
inline constexpr double kK0SeriesRadius = 2.0;
inline constexpr double kK0AsymptoticRadius = 15.0;

/// Principal-branch Macdonald function K0.  Throws DomainError at z = 0
/// and on the negative real axis.
cplx bessel_k0(cplx z);

/// K0(z) + ln z, continued analytically to z = 0 where it equals ln2 - C.
cplx k0_plus_log(cplx z);

/// Modified Bessel I0 (entire).
cplx bessel_i0(cplx z);

/// psi(n) for n >= 1.
double digamma_nat(int n);

/// The individual branches, exposed so tests can probe the seams.
cplx bessel_k0_series(cplx z);
cplx bessel_k0_continued_fraction(cplx z);
cplx bessel_k0_asymptotic(cplx z);

}  // namespace shallowbound
