#pragma once

#include "shallowbound/logpotential.hpp"

namespace shallowbound {

struct RadialOptions {
  int steps = 8000;       // RK4 steps in s = ln r
  double r_start = 1e-8;  // integration starts here with u = 1, u' = 0
  double rel_tol = 1e-10; // bisection stops at this relative width in k
};

/// Real radial multiplicative V, the only case the oracle handles.  Throws
/// UnsupportedOracle otherwise.
const PotentialSpec& radial_potential(const Perturbation& p);

/// u'/u - k K0'(kR)/K0(kR) at the support radius R, u the regular solution
/// of u'' + u'/r = (k^2 - eps V(r)) u.
double matching_mismatch(const PotentialSpec& v, double eps, double k, const RadialOptions& opt = {});

struct RadialResult {
  double k = 0.0;
  double lambda = 0.0;
  double mismatch = 0.0;
  int bisections = 0;
};

/// Bound state by bisection on [k_lo, k_hi] in ln k.  Throws
/// NoBoundStateInBracket when the matching condition does not change sign.
RadialResult radial_bound_state(const Perturbation& p, double eps, double k_lo, double k_hi = 0.5,
                                const RadialOptions& opt = {});

}  // namespace shallowbound
