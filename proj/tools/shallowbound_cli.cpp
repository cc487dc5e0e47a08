#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "shallowbound/errors.hpp"
#include "shallowbound/runner.hpp"

using namespace shallowbound;

namespace {

std::string columns_help() {
  std::ostringstream os;
  os << "CSV columns (complex values as _re/_im pairs, empty cells when not applicable):\n  ";
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << cols[i] << (i + 1 < cols.size() ? (i % 6 == 5 ? ",\n  " : ",") : "\n");
  os << "Exit codes: 0 ok, 1 example expectations failed, 2 validation error, 3 oracle not applicable,\n"
        "4 solver did not converge, 5 numerical guard (conditioning).\n"
        "SHALLOWBOUND_THREADS caps the worker count.";
  return os.str();
}

struct Args {
  std::string scenario;
  std::string out;
  std::string dir;
  Overrides over;
};

void add_common(CLI::App* sub, Args& a, bool scenario_required) {
  auto* opt = sub->add_option("--scenario", a.scenario, "scenario JSON file");
  if (scenario_required) opt->required();
  sub->add_option("--out", a.out, "write CSV here instead of stdout");
  sub->add_option("--grid-n", a.over.grid_n, "quadrature points per side")->check(CLI::Range(4, 256));
  sub->add_option("--terms", a.over.terms, "moment terms J")->check(CLI::Range(0, 12));
  sub->add_option("--alpha", a.over.alpha, "tolerance exponent in (0, 1)");
  sub->add_option("--margin", a.over.margin, "extra verdict margin (>= 0)");
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw ValidationError("cannot open output file " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Scenario load(const Args& a) {
  Scenario s = load_scenario(a.scenario);
  apply_overrides(s, a.over);
  return s;
}

int run(const std::string& cmd, const Args& a) {
  if (cmd == "check-identities") {
    IdentityReport rep = run_check_identities(load(a));
    Output out(a.out);
    write_identity_csv(out.stream(), rep);
    return 0;
  }
  if (cmd == "examples") {
    std::vector<ExampleOutcome> outcomes;
    if (!a.scenario.empty()) {
      Scenario s = load(a);
      ExampleOutcome ex{s.name, a.scenario, false, {}, run_sweep(s)};
      ex.failures = check_expectations(s, ex.rows);
      ex.pass = ex.failures.empty();
      outcomes.push_back(std::move(ex));
    } else {
      outcomes = run_examples(a.dir.empty() ? default_scenario_dir() : a.dir, a.over);
    }
    bool all = true;
    std::vector<ResultRow> rows;
    for (const auto& ex : outcomes) {
      std::cerr << (ex.pass ? "PASS " : "FAIL ") << ex.scenario << '\n';
      for (const auto& f : ex.failures) std::cerr << "     " << f << '\n';
      all = all && ex.pass;
      rows.insert(rows.end(), ex.rows.begin(), ex.rows.end());
    }
    Output out(a.out);
    write_csv(out.stream(), rows);
    return all ? 0 : 1;
  }
  Scenario s = load(a);
  std::vector<ResultRow> rows;
  if (cmd == "predict") rows = run_predict(s);
  else if (cmd == "solve") rows = run_solve(s);
  else if (cmd == "oracle") rows = run_oracle(s);
  else rows = run_sweep(s);
  Output out(a.out);
  write_csv(out.stream(), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow bound states of locally perturbed 2D Schroedinger operators"};
  app.footer(columns_help());
  app.require_subcommand(1);
  Args args;
  std::string cmd;
  for (const char* name : {"predict", "solve", "oracle", "sweep", "check-identities", "examples"}) {
    const std::string n = name;
    const char* what = n == "predict"            ? "asymptotic verdict and M-tilde per eps"
                       : n == "solve"            ? "discretized characteristic equation per eps"
                       : n == "oracle"           ? "radial shooting oracle (radial multiplicative only)"
                       : n == "sweep"            ? "predict, solve and oracle merged"
                       : n == "check-identities" ? "bilinear identities for a zero-mean U"
                                                 : "run bundled scenarios and check their expectations";
    CLI::App* sub = app.add_subcommand(n, what);
    add_common(sub, args, n != "examples");
    if (n == "examples") sub->add_option("--dir", args.dir, "scenario directory (default: bundled)");
    sub->callback([&cmd, n] { cmd = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::validation);
  }
  try {
    return run(cmd, args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::validation);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::validation);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::validation);
  } catch (const UnsupportedOracle& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::unsupported_oracle);
  } catch (const NoRootFound& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::no_convergence);
  } catch (const NoBoundStateInBracket& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::no_convergence);
  } catch (const NearSingularOperator& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_guard);
  } catch (const DegenerateSeries& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_guard);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_guard);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_guard);
  }
}
