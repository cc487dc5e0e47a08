#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "shallowbound/errors.hpp"
#include "shallowbound/predictor.hpp"
#include "shallowbound/special_functions.hpp"

namespace shallowbound {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNegligible = 1e-10;

bool negligible(cplx c, double scale) { return std::abs(c) <= kNegligible * scale; }

}  // namespace

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::exists: return "Exists";
    case Verdict::absent: return "Absent";
    default: return "Indeterminate";
  }
}

cplx m_tilde(const MomentSeries& m, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("m_tilde needs eps > 0");
  if (m.c.empty()) throw InvalidArgument("empty moment series");
  cplx s{};
  if (m.provenance == MomentProvenance::closed_form_rank_one) {
    s = m.rank_one_scale / (1.0 + eps * m.rank_one_ratio);
  } else {
    double p = 1.0;
    for (cplx c : m.c) {
      s += p * c;
      p *= -eps;
    }
  }
  if (s == cplx{} || !std::isfinite(std::abs(s)))
    throw DegenerateSeries("moment sum vanishes at eps = " + std::to_string(eps));
  return kTwoPi / (eps * s) + kEulerGamma - kLn2;
}

Verdict classify(cplx m, double eps, double alpha, double margin) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(margin >= 0.0)) throw InvalidArgument("margin must be non-negative");
  const double band = alpha * std::pow(eps, alpha) + margin;
  const double half = 0.5 * std::numbers::pi;
  if (m.real() > band && std::abs(m.imag()) < half - band) return Verdict::exists;
  if (m.real() < -band || std::abs(m.imag()) > half + band) return Verdict::absent;
  return Verdict::indeterminate;
}

bool series_vanishes(const MomentSeries& m) {
  for (cplx c : m.c)
    if (!negligible(c, m.scale)) return false;
  return true;
}

std::optional<cplx> leading_kappa(const MomentSeries& m, double eps, cplx* singular_part) {
  int p = 0;
  const int n = static_cast<int>(m.c.size());
  while (p < n && negligible(m.c[p], m.scale)) ++p;
  if (p == n || p + 1 + p >= n) return std::nullopt;
  // eps s(eps) = eps^{p+1} sum_i d_i eps^i with d_i = (-1)^{i+p} c_{i+p}.
  std::vector<cplx> d(p + 2), e(p + 2);
  for (int i = 0; i <= p + 1; ++i) d[i] = ((i + p) % 2 ? -1.0 : 1.0) * m.c[i + p];
  e[0] = 1.0 / d[0];
  for (int i = 1; i <= p + 1; ++i) {
    cplx s{};
    for (int k = 1; k <= i; ++k) s += d[k] * e[i - k];
    e[i] = -s / d[0];
  }
  if (singular_part) {
    cplx sing{};
    for (int i = 0; i <= p; ++i) sing += kTwoPi * e[i] * std::pow(eps, i - p - 1);
    *singular_part = sing;
  }
  return 2.0 * std::exp(-kTwoPi * e[p + 1] - kEulerGamma);
}

Prediction predict(const Perturbation& p, const GridPtr& grid, double eps, const PredictOptions& opt) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
  if (opt.terms < 0) throw InvalidArgument("terms must be non-negative");
  Prediction out;
  out.epsilon = eps;
  out.band = opt.alpha * std::pow(eps, opt.alpha) + opt.margin;
  out.moments = moment_series(p, grid, eps, opt.terms);
  if (series_vanishes(out.moments)) {
    out.m_tilde = cplx(-std::numeric_limits<double>::infinity(), 0.0);
    out.verdict = Verdict::absent;
    return out;
  }
  out.m_tilde = m_tilde(out.moments, eps);
  out.verdict = classify(out.m_tilde, eps, opt.alpha, opt.margin);
  if (out.verdict == Verdict::exists) {
    const cplx k = std::exp(-out.m_tilde);
    out.k = k;
    out.lambda = -(k * k);
  }
  const bool plain = p.is_multiplicative() && !std::get<Multiplicative>(p.kind()).v1;
  if (plain) {
    cplx sing;
    if (auto kappa = leading_kappa(out.moments, eps, &sing)) {
      out.kappa = kappa;
      out.lambda_leading = -(*kappa * *kappa) * std::exp(-2.0 * sing);
    }
  }
  return out;
}

double complex_threshold(const PotentialSpec& v, const GridPtr& grid) {
  if (!v.is_real()) throw InvalidArgument("threshold example needs a real v");
  Field f = sample_potential(v, grid);
  const cplx mean = integrate(f);
  const double norm = l2_norm(f);
  if (norm == 0.0) throw InvalidArgument("threshold example needs v != 0");
  return std::norm(mean) / (8.0 * norm * norm);
}

ThresholdResult complex_threshold_example(const PotentialSpec& v, double a, const GridPtr& grid, double eps,
                                          const PredictOptions& opt) {
  ThresholdResult r;
  r.threshold = complex_threshold(v, grid);
  PotentialSpec V = v + v.with_op(TermOp::laplacian).scaled(cplx(0.0, a));
  r.prediction = predict(Perturbation(Multiplicative{V, std::nullopt}), grid, eps, opt);
  r.side = r.prediction.verdict;
  return r;
}

}  // namespace shallowbound
