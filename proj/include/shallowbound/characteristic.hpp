#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shallowbound/logpotential.hpp"

namespace shallowbound {

struct SolverOptions {
  double max_k = 0.5;  // roots with |k| beyond this are reported as absent
  double tolerance = 1e-12;
  int max_iterations = 50;
  double condition_limit = 1e12;
};

/// Counting region {r_min <= |k| <= r_max, |arg k| <= half_angle}.
struct Sector {
  double r_min = 1e-12;
  double r_max = 0.3;
  double half_angle = 0.5 * std::numbers::pi - 0.05;
};

enum class SolveStatus { converged, absent_by_solver };
const char* to_string(SolveStatus s) noexcept;

struct CharEqSolution {
  SolveStatus status = SolveStatus::absent_by_solver;
  cplx m{};  // -ln k
  cplx k{};
  cplx lambda{};
  int iterations = 0;
  double f_abs = 0.0;  // |F(k)| at the returned point
  std::string note;
  /// B(k) L[1] on the solver grid at the root.
  std::optional<Field> density;
};

struct EigenResult {
  Field phi;  // on the evaluation lattice, max |phi| = 1 and real there
  double residual_norm = 0.0;
};

/// T0(k) as a dense matrix on the grid, for inspection and tests.
struct DiscretizedOperator {
  GridPtr grid;
  cplx k{};
  double epsilon = 0.0;
  Eigen::MatrixXcd t0;
};

/// Everything about I + eps T0(k) that does not depend on k, factored once.
/// With ln k = -M, T0 g = L[Delta^{-1} g - (1/2pi) int D(k|x-y|) g] where
/// D(z) = K0(z) + ln(z/2) + C vanishes at z = 0.
class CharacteristicSystem {
 public:
  CharacteristicSystem(const Perturbation& p, GridPtr grid, double eps, const SolverOptions& opt = {});
  ~CharacteristicSystem();
  CharacteristicSystem(const CharacteristicSystem&) = delete;
  CharacteristicSystem& operator=(const CharacteristicSystem&) = delete;

  const GridPtr& grid() const noexcept { return grid_; }
  double epsilon() const noexcept { return eps_; }
  const SolverOptions& options() const noexcept { return opt_; }

  /// B(k) L[1] with k = exp(-M).
  Field density(cplx M) const;
  /// F(exp(-M)).
  cplx char_function_m(cplx M) const;
  cplx char_function(cplx k) const;

  /// Fixed-point iteration M <- 2pi / (eps <B L1>) + C - ln 2 from m_init,
  /// with a secant fallback.  Leaving |k| <= max_k or Re k > 0 gives
  /// absent_by_solver; stalling throws NoRootFound.
  CharEqSolution find_root(cplx m_init) const;

  /// Zeros of F inside the sector, by the argument principle.
  int count_roots(const Sector& s = {}) const;

  /// phi = A(k) x at arbitrary points, x = density at the root.
  std::vector<cplx> eigenfunction_at(const CharEqSolution& sol, std::span<const double> xs,
                                     std::span<const double> ys) const;
  /// phi on an n x n midpoint lattice over the grid domain, with the
  /// relative residual of -Delta phi - eps L phi - lambda phi (five-point
  /// Laplacian, nodes at least two cells from the edge).
  EigenResult eigenfunction(const CharEqSolution& sol, int lattice_n = 64) const;

  DiscretizedOperator t0(cplx k) const;

 private:
  struct Impl;
  Eigen::VectorXcd solve(cplx M) const;
  cplx mean_of(const Eigen::VectorXcd& xa) const;

  Perturbation p_;
  GridPtr grid_;
  double eps_;
  SolverOptions opt_;
  std::unique_ptr<Impl> impl_;
};

cplx char_function(const Perturbation& p, const GridPtr& grid, double eps, cplx k);
CharEqSolution find_root(const Perturbation& p, const GridPtr& grid, double eps, std::optional<cplx> m_init = {},
                         const SolverOptions& opt = {});
int count_roots(const Perturbation& p, const GridPtr& grid, double eps, const Sector& s = {});
DiscretizedOperator assemble_t0(const Perturbation& p, const GridPtr& grid, cplx k, double eps);

}  // namespace shallowbound
