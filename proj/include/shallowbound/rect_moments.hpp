#pragma once

#include <array>

#include "shallowbound/geometry.hpp"

namespace shallowbound {

/// Monomial order used by every Taylor patch: 1, dx, dy, dx^2, dx*dy, dy^2.
using Moments6 = std::array<double, 6>;

/// Exact integrals over the rectangle q of (y - p)^alpha * ln|t - y| for the
/// six monomials above.
Moments6 log_moments(const RectDomain& q, double tx, double ty, double px, double py);

/// Exact integrals of (y - p)^alpha * (t - y)_i / |t - y|^2, i = 1, 2.
struct GradMoments {
  Moments6 x, y;
};
GradMoments grad_moments(const RectDomain& q, double tx, double ty, double px, double py);

}  // namespace shallowbound
