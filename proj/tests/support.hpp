#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "shallowbound/geometry.hpp"
#include "shallowbound/logpotential.hpp"

namespace test {

using shallowbound::cplx;

inline std::string data_path(const std::string& name) { return std::string(SHALLOWBOUND_TEST_DATA) + "/" + name; }

inline double rel_err(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// 16/pi (1 - r^2)^3 on the unit disk: <V> = 4.
inline shallowbound::PotentialSpec positive_bump(cplx amplitude = 16.0 / std::numbers::pi) {
  return shallowbound::PotentialSpec::polynomial_bump(amplitude, 0.0, 0.0, 1.0, 3.0);
}

inline shallowbound::RectDomain box(double h = 1.2) { return {-h, h, -h, h}; }

}  // namespace test
