// One line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "shallowbound/characteristic.hpp"
#include "shallowbound/errors.hpp"
#include "shallowbound/predictor.hpp"
#include "shallowbound/radial.hpp"
#include "shallowbound/runner.hpp"
#include "shallowbound/scenario.hpp"
#include "shallowbound/special_functions.hpp"

using namespace shallowbound;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario bundled(const std::string& name) { return load_scenario(default_scenario_dir() + "/" + name + ".json"); }

const PotentialSpec& multiplicative_v(const Scenario& s) { return std::get<Multiplicative>(s.perturbation.kind()).v; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

Outcome radial_triangle() {
  const auto t0 = Clock::now();
  Scenario s = bundled("ex1_positive_mean");
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  const std::vector<double> eps = {0.4, 0.3, 0.2};
  std::vector<double> err;
  bool ok = true;
  std::string d;
  for (double e : eps) {
    Prediction p = predict(s.perturbation, g, e, {3, s.params.alpha, s.params.margin});
    if (!p.lambda_leading) return {false, "no leading-form eigenvalue"};
    RadialResult o = radial_bound_state(s.perturbation, e, std::exp(-2.0 * std::max(p.m_tilde.real(), 1.0)));
    const double x = std::abs(std::log(-p.lambda_leading->real()) - std::log(-o.lambda));
    err.push_back(x);
    ok = ok && x <= 1.5 * e && std::abs(p.lambda_leading->imag()) == 0.0;
    d += fmt("eps=%.1f err=%.4f ", e, x);
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double r = err[i] / err[i + 1];
    ok = ok && r >= 1.1 && r <= 2.5;
    d += fmt("ratio=%.3f ", r);
  }
  const double t = seconds_since(t0);
  ok = ok && t <= 60.0;
  return {ok, d + fmt("time=%.1fs", t)};
}

Outcome power_precision() {
  Scenario s = bundled("ex1_positive_mean");
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  double gap[2];
  const double eps[2] = {0.4, 0.2};
  for (int i = 0; i < 2; ++i) {
    const cplx mt = m_tilde(moment_series(s.perturbation, g, eps[i], 3), eps[i]);
    CharEqSolution sol = CharacteristicSystem(s.perturbation, g, eps[i], s.params.solver).find_root(mt);
    if (sol.status != SolveStatus::converged) return {false, "solver found no root"};
    gap[i] = std::abs(sol.m - mt);
  }
  const double f = gap[0] / gap[1];
  return {f >= 4.0, fmt("|m - M3| eps=0.4: %.3e eps=0.2: %.3e factor=%.2f", gap[0], gap[1], f)};
}

Outcome identities() {
  const auto t0 = Clock::now();
  Scenario s = bundled("ex1_zero_mean");
  GridPtr g = build_grid(s.domain, 96);
  auto checks = check_identities(multiplicative_v(s), g, 3);
  const double t = seconds_since(t0);
  bool ok = t <= 30.0;
  std::string d;
  for (const auto& c : checks) {
    ok = ok && c.relative <= 1e-6;
    d += fmt("%.2e ", c.relative);
  }
  return {ok, "relative " + d + fmt("time=%.1fs", t)};
}

Outcome rank_one() {
  Scenario s = bundled("ex3_rho_one");
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  const double eps = 0.1;
  MomentSeries closed = moment_series(s.perturbation, g, eps, 3);
  MomentSeries nested = moment_series(s.perturbation, g, eps, 3, true);
  double worst = 0.0;
  for (int j = 0; j <= 3; ++j) worst = std::max(worst, rel(closed.c[j], nested.c[j]));
  const cplx mt = m_tilde(closed, eps);
  CharEqSolution sol = CharacteristicSystem(s.perturbation, g, eps, s.params.solver).find_root(mt);
  const double gap = std::abs(sol.m - mt);
  const bool ok = closed.provenance == MomentProvenance::closed_form_rank_one &&
                  sol.status == SolveStatus::converged && gap <= 1e-2 && worst <= 1e-8;
  return {ok, fmt("M~=%.6f m=%.6f gap=%.2e moments rel=%.2e", mt.real(), sol.m.real(), gap, worst)};
}

Outcome absence() {
  const Sector sector{1e-12, 0.3, 0.5 * kPi - 0.05};
  bool ok = true;
  std::string d;
  for (const char* name : {"ex1_negative_mean", "ex1_complex_above_threshold"}) {
    Scenario s = bundled(name);
    GridPtr g = build_grid(s.domain, s.params.grid_n);
    const double eps = s.epsilons.back();
    const cplx mt = m_tilde(moment_series(s.perturbation, g, eps, 3), eps);
    CharacteristicSystem sys(s.perturbation, g, eps, s.params.solver);
    CharEqSolution sol = sys.find_root(mt);
    const int n = sys.count_roots(sector);
    const bool precondition = s.perturbation.is_real() ? mt.real() < 0.0 : std::abs(mt.imag()) > 0.5 * kPi + 0.1;
    ok = ok && precondition && sol.status == SolveStatus::absent_by_solver && n == 0;
    d += fmt("%s: M~=%.3f%+.3fi %s roots=%d; ", name, mt.real(), mt.imag(), to_string(sol.status), n);
  }
  return {ok, d};
}

Outcome complex_threshold_case() {
  Scenario s = bundled("ex1_positive_mean");
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  const PotentialSpec& v = multiplicative_v(s);
  const double eps = 0.1;
  const double t = complex_threshold(v, g);
  ThresholdResult lo = complex_threshold_example(v, 0.5 * t, g, eps);
  ThresholdResult hi = complex_threshold_example(v, 2.0 * t, g, eps);
  ThresholdResult mid = complex_threshold_example(v, 0.8 * t, g, eps);
  PotentialSpec vm = v + v.with_op(TermOp::laplacian).scaled(cplx(0.0, 0.8 * t));
  CharEqSolution sol =
      CharacteristicSystem(Perturbation(Multiplicative{vm, {}}), g, eps, s.params.solver).find_root(mid.prediction.m_tilde);
  const double ratio = sol.status == SolveStatus::converged ? std::abs(sol.lambda.imag()) / std::abs(sol.lambda) : 0.0;
  const bool ok = lo.side == Verdict::exists && hi.side == Verdict::absent && sol.status == SolveStatus::converged &&
                  ratio >= 0.1;
  return {ok, fmt("T=%.6f 0.5T:%s 2T:%s 0.8T |Im l|/|l|=%.3f", t, to_string(lo.side), to_string(hi.side), ratio)};
}

Outcome eigen_residual() {
  Scenario s = bundled("ex1_positive_mean");
  const double eps = 0.3;
  std::vector<double> res;
  std::string d;
  for (auto [n, lat] : {std::pair{24, 32}, std::pair{32, 64}, std::pair{48, 128}}) {
    GridPtr g = build_grid(s.domain, n);
    CharacteristicSystem sys(s.perturbation, g, eps, s.params.solver);
    CharEqSolution sol = sys.find_root(m_tilde(moment_series(s.perturbation, g, eps, 3), eps));
    if (sol.status != SolveStatus::converged) return {false, "solver found no root"};
    res.push_back(sys.eigenfunction(sol, lat).residual_norm);
    d += fmt("grid %d lattice %d: %.3e; ", n, lat, res.back());
  }
  const bool ok = res[1] <= 2e-2 && res[0] > res[1] && res[1] > res[2];
  return {ok, d};
}

Outcome paradox() {
  Scenario s = bundled("ex2_paradox_exists");
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  // v from the scenario's V = Delta v
  const PotentialTerm& term = multiplicative_v(s).terms().front();
  PotentialTerm vt = term;
  vt.op = TermOp::value;
  const PotentialSpec v({vt});
  const PotentialSpec lap = v.with_op(TermOp::laplacian);
  const cplx mean = integrate(sample_potential(v, g));
  const cplx grad2 = -integrate(sample_potential(v, g).pointwise(sample_potential(lap, g)));
  const double eps = 0.1;
  std::string d = fmt("||grad v||^2/<v>=%.4f ", (grad2 / mean).real());
  bool ok = true;
  for (double f : {-0.5, -2.0}) {
    const double a = f * (grad2 / mean).real();
    Perturbation p(Multiplicative{lap, v.scaled(a)});
    Prediction pr = predict(p, g, eps);
    CharEqSolution sol = CharacteristicSystem(p, g, eps, s.params.solver).find_root(pr.m_tilde);
    if (f == -0.5)
      ok = ok && pr.verdict == Verdict::exists && sol.status == SolveStatus::converged;
    else
      ok = ok && pr.verdict == Verdict::absent;
    d += fmt("a=%.3f: %s/%s ", a, to_string(pr.verdict), to_string(sol.status));
  }
  return {ok, d};
}

Outcome divergence() {
  Scenario s = bundled("ex4_divergence_form");
  const auto& df = std::get<DivergenceForm>(s.perturbation.kind());
  Perturbation bare(df.zero_order.index() == 0 ? Perturbation::Variant(std::get<Multiplicative>(df.zero_order))
                                               : Perturbation::Variant(std::get<RankOne>(df.zero_order)));
  GridPtr g = build_grid(s.domain, s.params.grid_n);
  double worst_m = 0.0, worst_s = 0.0;
  for (double eps : {0.4, 0.2}) {
    const cplx a = m_tilde(moment_series(bare, g, eps, 3), eps);
    const cplx b = m_tilde(moment_series(s.perturbation, g, eps, 3), eps);
    worst_m = std::max(worst_m, rel(a, b));
    CharEqSolution sa = CharacteristicSystem(bare, g, eps, s.params.solver).find_root(a);
    CharEqSolution sb = CharacteristicSystem(s.perturbation, g, eps, s.params.solver).find_root(b);
    if (sa.status != SolveStatus::converged || sb.status != SolveStatus::converged) return {false, "solver found no root"};
    worst_s = std::max(worst_s, rel(sa.m, sb.m));
  }
  return {worst_m <= 1e-8 && worst_s <= 1e-3, fmt("M~ rel=%.2e m rel=%.2e", worst_m, worst_s)};
}

Outcome k0_accuracy() {
  std::ifstream in(std::string(SHALLOWBOUND_TEST_DATA) + "/k0_reference.csv");
  if (!in) return {false, "reference data missing"};
  std::string line;
  std::getline(in, line);
  int n = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double v[4];
    char c;
    ls >> v[0] >> c >> v[1] >> c >> v[2] >> c >> v[3];
    worst = std::max(worst, rel(bessel_k0({v[0], v[1]}), {v[2], v[3]}));
    ++n;
  }
  // z^2 K0'' + z K0' - z^2 K0 = 0 on a ring of points, by differences
  double ode = 0.0;
  for (int i = 0; i < 64; ++i) {
    const cplx z = std::polar(0.05 * std::pow(600.0, i / 63.0), -3.0 + 6.0 * i / 63.0);
    const cplx h = 1e-3 * std::min(1.0, std::abs(z)) * z / std::abs(z);
    const cplx f0 = bessel_k0(z), fp = bessel_k0(z + h), fm = bessel_k0(z - h);
    const cplx d1 = (fp - fm) / (2.0 * h), d2 = (fp - 2.0 * f0 + fm) / (h * h);
    ode = std::max(ode, std::abs(z * z * d2 + z * d1 - z * z * f0) / (std::abs(z * z * f0) + std::abs(z * d1)));
  }
  return {n == 200 && worst <= 1e-11 && ode <= 1e-5, fmt("points=%d worst rel=%.2e ode residual=%.2e", n, worst, ode)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"radial triangle", radial_triangle},
      {"power precision", power_precision},
      {"identities", identities},
      {"rank one", rank_one},
      {"absence", absence},
      {"complex threshold", complex_threshold_case},
      {"eigenfunction residual", eigen_residual},
      {"example 2 paradox", paradox},
      {"divergence form", divergence},
      {"K0 accuracy", k0_accuracy},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu %-22s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
