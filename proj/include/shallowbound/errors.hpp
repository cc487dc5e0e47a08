#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace shallowbound {

/// Process exit codes shared by the CLI and the scenario runner.
enum class ExitCode : int {
  success = 0,
  validation = 2,
  unsupported_oracle = 3,
  no_convergence = 4,
  numerical_guard = 5,
};

/// Bad arguments to a library call (grid size, out-of-domain support, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input: CSV tables, scenario JSON.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a special function (branch cut, origin).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The truncated moment sum vanished, so M-tilde is undefined.
class DegenerateSeries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// I + eps*T0(k) is singular or too badly conditioned to trust.
class NearSingularOperator : public std::runtime_error {
 public:
  NearSingularOperator(const std::string& what, std::complex<double> k)
      : std::runtime_error(what), k_(k) {}
  std::complex<double> k() const noexcept { return k_; }

 private:
  std::complex<double> k_;
};

/// Root iteration diverged or cycled without converging.
class NoRootFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |F| dropped below the safety floor on the counting contour.
class InconclusiveContour : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The radial matching function has no sign change on the bracket.
class NoBoundStateInBracket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The radial oracle was asked about a non-radial or non-multiplicative case.
class UnsupportedOracle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario failed validation; `line` is 0 when no position is known.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace shallowbound
