#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shallowbound/scenario.hpp"

namespace shallowbound {

/// One output line per (scenario, eps).  Verdict is one of Exists, Absent,
/// Indeterminate, AbsentBySolver, Degenerate; lambda fields stay empty
/// unless the matching stage found a bound state.
struct ResultRow {
  std::string scenario;
  double epsilon = 0.0;
  std::string verdict;
  std::string solver_status;
  std::optional<cplx> m_tilde, m_solved, k_pred, k_solved;
  std::optional<double> k_oracle;
  std::optional<cplx> lambda_pred, lambda_leading, lambda_solved;
  std::optional<double> lambda_oracle;
  std::optional<double> residual_norm;
  std::optional<int> root_count;
  double wall_ms = 0.0;
  std::string note;
};

std::vector<ResultRow> run_predict(const Scenario& s);
std::vector<ResultRow> run_solve(const Scenario& s);
/// Throws UnsupportedOracle for non-radial or non-multiplicative scenarios.
std::vector<ResultRow> run_oracle(const Scenario& s);
/// Predictor, solver and (when applicable) oracle merged per eps.
std::vector<ResultRow> run_sweep(const Scenario& s);

struct IdentityReport {
  std::string scenario;
  int grid_n = 0;
  double tolerance = 1e-6;
  std::array<IdentityCheck, 3> checks;
  bool pass() const;
};
/// Uses the scenario's multiplicative V (or the zero-order V of a
/// divergence form) as U.
IdentityReport run_check_identities(const Scenario& s);

struct ExampleOutcome {
  std::string scenario;
  std::string path;
  bool pass = false;
  std::vector<std::string> failures;
  std::vector<ResultRow> rows;
};
/// Expectation mismatches for one scenario's sweep rows.
std::vector<std::string> check_expectations(const Scenario& s, const std::vector<ResultRow>& rows);
/// Every *.json under `dir`, in file-name order.
std::vector<ExampleOutcome> run_examples(const std::string& dir, const Overrides& o = {});
std::string default_scenario_dir();

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const ResultRow& r);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Inverse of write_csv; throws FormatError on anything else.
std::vector<ResultRow> read_csv(std::istream& in);
void write_identity_csv(std::ostream& out, const IdentityReport& r);

}  // namespace shallowbound
