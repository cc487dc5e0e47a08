#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shallowbound/characteristic.hpp"
#include "shallowbound/predictor.hpp"
#include "shallowbound/radial.hpp"

namespace shallowbound {

inline constexpr int kScenarioVersion = 1;

struct ScenarioParams {
  int grid_n = 48;
  int terms = 3;
  double alpha = 0.5;
  double margin = 0.0;
  SolverOptions solver;
  int eval_n = 64;
  bool count_roots = true;
  Sector sector;
};

/// What `examples` checks for every eps of a scenario.
struct Expectation {
  std::optional<Verdict> verdict;
  std::optional<SolveStatus> solver;
  std::optional<int> root_count;
  std::optional<double> residual_max;
  /// Relative agreement of k_solved with the radial oracle.
  std::optional<double> oracle_tolerance;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string source;  // file the scenario came from, if any
  RectDomain domain{-1.0, 1.0, -1.0, 1.0};
  Perturbation perturbation{Multiplicative{}};
  std::vector<double> epsilons;  // strictly positive, descending
  ScenarioParams params;
  std::uint64_t seed = 0;
  /// Largest eps for which this scenario is known to behave (informational).
  std::optional<double> eps0;
  Expectation expect;
};

/// Parses scenario JSON.  Relative table paths resolve against base_dir.
/// Throws ValidationError carrying the offending line.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct Overrides {
  std::optional<int> grid_n;
  std::optional<int> terms;
  std::optional<double> alpha;
  std::optional<double> margin;
};
void apply_overrides(Scenario& s, const Overrides& o);

Verdict parse_verdict(const std::string& s);
SolveStatus parse_solve_status(const std::string& s);

}  // namespace shallowbound
