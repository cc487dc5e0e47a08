#pragma once

#include <optional>

#include "shallowbound/logpotential.hpp"

namespace shallowbound {

enum class Verdict { exists, absent, indeterminate };
const char* to_string(Verdict v) noexcept;

struct PredictOptions {
  int terms = 3;        // J
  double alpha = 0.5;   // tolerance exponent
  double margin = 0.0;  // extra safety margin on the verdict thresholds
};

struct Prediction {
  cplx m_tilde{};
  Verdict verdict = Verdict::indeterminate;
  /// Set only for Exists: k = exp(-m_tilde), lambda = -k^2.
  std::optional<cplx> k;
  std::optional<cplx> lambda;
  /// Leading form lambda = -kappa^2 exp(singular part), available for
  /// multiplicative perturbations without an eps-dependent part when the
  /// series carries enough terms.
  std::optional<cplx> kappa;
  std::optional<cplx> lambda_leading;
  /// alpha eps^alpha + margin, the width of the undecided band.
  double band = 0.0;
  double epsilon = 0.0;
  MomentSeries moments;
};

/// M-tilde = 2pi / (eps sum_j (-eps)^j c_j) + C - ln 2.  Rank-one series
/// use the summed geometric form.  Throws DegenerateSeries when the sum
/// vanishes.
cplx m_tilde(const MomentSeries& m, double eps);

Verdict classify(cplx m, double eps, double alpha = 0.5, double margin = 0.0);

/// True when every c_j is negligible against <|L[1]|>; such a perturbation
/// cannot bind.
bool series_vanishes(const MomentSeries& m);

Prediction predict(const Perturbation& p, const GridPtr& grid, double eps, const PredictOptions& opt = {});

/// Builds the leading-order prefactor from the Laurent expansion of
/// 2pi / (eps s(eps)) when c_0 .. c_{2p+1} are available, p being the index
/// of the first non-negligible coefficient.
std::optional<cplx> leading_kappa(const MomentSeries& m, double eps, cplx* singular_part = nullptr);

/// V = v + i a Delta v.  T = <v>^2 / (8 ||v||^2) separates binding from
/// non-binding as eps -> 0; `side` is the verdict of the full predictor at
/// the given eps.
struct ThresholdResult {
  double threshold = 0.0;
  Verdict side = Verdict::indeterminate;
  Prediction prediction;
};
ThresholdResult complex_threshold_example(const PotentialSpec& v, double a, const GridPtr& grid, double eps = 0.1,
                                          const PredictOptions& opt = {});
double complex_threshold(const PotentialSpec& v, const GridPtr& grid);

}  // namespace shallowbound
