#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "shallowbound/errors.hpp"
#include "shallowbound/kernels.hpp"
#include "shallowbound/runner.hpp"

namespace shallowbound {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void add_note(ResultRow& r, const std::string& n) {
  if (!r.note.empty()) r.note += "; ";
  r.note += n;
}

PredictOptions predict_options(const Scenario& s) { return {s.params.terms, s.params.alpha, s.params.margin}; }

struct Stage {
  std::optional<Prediction> pred;
  bool degenerate = false;
};

Stage predict_into(const Scenario& s, const GridPtr& grid, double eps, ResultRow& r) {
  Stage st;
  try {
    st.pred = predict(s.perturbation, grid, eps, predict_options(s));
  } catch (const DegenerateSeries& e) {
    st.degenerate = true;
    r.verdict = "Degenerate";
    add_note(r, e.what());
    return st;
  }
  const Prediction& p = *st.pred;
  r.m_tilde = p.m_tilde;
  r.verdict = to_string(p.verdict);
  if (p.verdict == Verdict::exists) {
    r.k_pred = p.k;
    r.lambda_pred = p.lambda;
    r.lambda_leading = p.lambda_leading;
  }
  return st;
}

void solve_into(const Scenario& s, const GridPtr& grid, double eps, const Stage& st, ResultRow& r) {
  if (st.degenerate) {
    add_note(r, "solver skipped: no starting point");
    return;
  }
  if (series_vanishes(st.pred->moments)) {
    r.solver_status = to_string(SolveStatus::absent_by_solver);
    add_note(r, "L[1] and all moments vanish");
    return;
  }
  CharacteristicSystem sys(s.perturbation, grid, eps, s.params.solver);
  CharEqSolution sol = sys.find_root(st.pred->m_tilde);
  r.solver_status = to_string(sol.status);
  r.m_solved = sol.m;
  if (!sol.note.empty()) add_note(r, sol.note);
  if (sol.status == SolveStatus::converged) {
    r.k_solved = sol.k;
    r.lambda_solved = sol.lambda;
    r.residual_norm = sys.eigenfunction(sol, s.params.eval_n).residual_norm;
  }
  if (s.params.count_roots) {
    try {
      r.root_count = sys.count_roots(s.params.sector);
    } catch (const InconclusiveContour& e) {
      add_note(r, std::string("root count inconclusive: ") + e.what());
    }
  }
}

void oracle_into(const Scenario& s, double eps, const Stage& st, ResultRow& r) {
  double mre = 1.0;
  if (st.pred && std::isfinite(st.pred->m_tilde.real())) mre = std::max(st.pred->m_tilde.real(), 1.0);
  const double k_lo = std::max(std::exp(-2.0 * mre), 1e-300);
  try {
    RadialResult o = radial_bound_state(s.perturbation, eps, k_lo, 0.5);
    r.k_oracle = o.k;
    r.lambda_oracle = o.lambda;
  } catch (const NoBoundStateInBracket& e) {
    add_note(r, std::string("oracle: ") + e.what());
  }
}

template <class Fill>
std::vector<ResultRow> per_eps(const Scenario& s, Fill fill) {
  GridPtr grid = build_grid(s.domain, s.params.grid_n);
  std::vector<ResultRow> rows(s.epsilons.size());
  parallel_tasks(s.epsilons.size(), [&](std::size_t i) {
    const auto t0 = Clock::now();
    ResultRow& r = rows[i];
    r.scenario = s.name;
    r.epsilon = s.epsilons[i];
    fill(grid, r.epsilon, r);
    r.wall_ms = elapsed_ms(t0);
  });
  return rows;
}

}  // namespace

std::vector<ResultRow> run_predict(const Scenario& s) {
  return per_eps(s, [&](const GridPtr& g, double eps, ResultRow& r) { predict_into(s, g, eps, r); });
}

std::vector<ResultRow> run_solve(const Scenario& s) {
  return per_eps(s, [&](const GridPtr& g, double eps, ResultRow& r) {
    Stage st = predict_into(s, g, eps, r);
    solve_into(s, g, eps, st, r);
    r.verdict = r.solver_status == to_string(SolveStatus::converged) ? "Exists"
                : r.solver_status.empty()                            ? r.verdict
                                                                     : "AbsentBySolver";
    if (r.verdict != "Exists") {
      r.k_pred.reset();
      r.lambda_pred.reset();
      r.lambda_leading.reset();
    }
  });
}

std::vector<ResultRow> run_oracle(const Scenario& s) {
  radial_potential(s.perturbation);
  return per_eps(s, [&](const GridPtr& g, double eps, ResultRow& r) {
    Stage st = predict_into(s, g, eps, r);
    r.k_pred.reset();
    r.lambda_pred.reset();
    r.lambda_leading.reset();
    oracle_into(s, eps, st, r);
    r.verdict = r.k_oracle ? "Exists" : "Absent";
  });
}

std::vector<ResultRow> run_sweep(const Scenario& s) {
  bool radial = true;
  try {
    radial_potential(s.perturbation);
  } catch (const UnsupportedOracle&) {
    radial = false;
  }
  return per_eps(s, [&](const GridPtr& g, double eps, ResultRow& r) {
    Stage st = predict_into(s, g, eps, r);
    solve_into(s, g, eps, st, r);
    if (radial) oracle_into(s, eps, st, r);
  });
}

bool IdentityReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [&](const IdentityCheck& c) { return c.relative <= tolerance; });
}

IdentityReport run_check_identities(const Scenario& s) {
  const Perturbation::Variant& k = s.perturbation.kind();
  const Multiplicative* m = std::get_if<Multiplicative>(&k);
  if (!m)
    if (const auto* d = std::get_if<DivergenceForm>(&k)) m = std::get_if<Multiplicative>(&d->zero_order);
  if (!m) throw ValidationError("check-identities needs a multiplicative potential U");
  IdentityReport rep;
  rep.scenario = s.name;
  rep.grid_n = s.params.grid_n;
  rep.checks = check_identities(m->v, build_grid(s.domain, s.params.grid_n), 3);
  return rep;
}

std::vector<std::string> check_expectations(const Scenario& s, const std::vector<ResultRow>& rows) {
  std::vector<std::string> out;
  const Expectation& e = s.expect;
  for (const ResultRow& r : rows) {
    std::ostringstream at;
    at << "eps=" << r.epsilon << ": ";
    if (e.verdict && r.verdict != to_string(*e.verdict))
      out.push_back(at.str() + "verdict " + r.verdict + ", expected " + to_string(*e.verdict));
    if (e.solver && r.solver_status != to_string(*e.solver))
      out.push_back(at.str() + "solver " + (r.solver_status.empty() ? "<none>" : r.solver_status) + ", expected " +
                    to_string(*e.solver));
    if (e.root_count && r.root_count != e.root_count)
      out.push_back(at.str() + "root count " + (r.root_count ? std::to_string(*r.root_count) : "<none>") +
                    ", expected " + std::to_string(*e.root_count));
    if (e.residual_max && !(r.residual_norm && *r.residual_norm <= *e.residual_max))
      out.push_back(at.str() + "eigenfunction residual above " + std::to_string(*e.residual_max));
    if (e.oracle_tolerance) {
      if (!r.k_solved || !r.k_oracle) {
        out.push_back(at.str() + "oracle comparison needs both k_solved and k_oracle");
      } else {
        const double rel = std::abs(*r.k_solved - *r.k_oracle) / *r.k_oracle;
        if (!(rel <= *e.oracle_tolerance))
          out.push_back(at.str() + "k_solved and k_oracle differ by " + std::to_string(rel) + " relative");
      }
    }
  }
  return out;
}

std::string default_scenario_dir() {
  if (const char* env = std::getenv("SHALLOWBOUND_SCENARIO_DIR")) return env;
  return SHALLOWBOUND_SCENARIO_DIR;
}

std::vector<ExampleOutcome> run_examples(const std::string& dir, const Overrides& o) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("scenario directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  std::vector<ExampleOutcome> out;
  for (const auto& p : paths) {
    Scenario s = load_scenario(p);
    apply_overrides(s, o);
    ExampleOutcome ex;
    ex.scenario = s.name;
    ex.path = p;
    ex.rows = run_sweep(s);
    ex.failures = check_expectations(s, ex.rows);
    ex.pass = ex.failures.empty();
    out.push_back(std::move(ex));
  }
  return out;
}

// CSV

namespace {

const std::vector<std::string> kColumns = {
    "scenario",         "epsilon",           "verdict",         "solver_status",   "m_tilde_re",
    "m_tilde_im",       "m_solved_re",       "m_solved_im",     "k_pred_re",       "k_pred_im",
    "k_solved_re",      "k_solved_im",       "k_oracle",        "lambda_pred_re",  "lambda_pred_im",
    "lambda_leading_re", "lambda_leading_im", "lambda_solved_re", "lambda_solved_im", "lambda_oracle",
    "residual_norm",    "root_count",        "wall_ms",         "note"};

std::string fmt(double v) {
  if (v == 0.0) v = 0.0;
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_record(std::istream& in, bool& ok) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell += '"';
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cell += c;
    }
  }
  ok = any;
  if (quoted) throw FormatError("unterminated quote in CSV");
  if (any) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::string& col) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError("column " + col + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& csv_columns() { return kColumns; }

void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const ResultRow& r) {
  std::vector<std::string> c;
  auto opt_c = [&](const std::optional<cplx>& v) {
    c.push_back(v ? fmt(v->real()) : "");
    c.push_back(v ? fmt(v->imag()) : "");
  };
  auto opt_d = [&](const std::optional<double>& v) { c.push_back(v ? fmt(*v) : ""); };
  c.push_back(quote(r.scenario));
  c.push_back(fmt(r.epsilon));
  c.push_back(r.verdict);
  c.push_back(r.solver_status);
  opt_c(r.m_tilde);
  opt_c(r.m_solved);
  opt_c(r.k_pred);
  opt_c(r.k_solved);
  opt_d(r.k_oracle);
  opt_c(r.lambda_pred);
  opt_c(r.lambda_leading);
  opt_c(r.lambda_solved);
  opt_d(r.lambda_oracle);
  opt_d(r.residual_norm);
  c.push_back(r.root_count ? std::to_string(*r.root_count) : "");
  {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << r.wall_ms;
    c.push_back(os.str());
  }
  c.push_back(quote(r.note));
  for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
  out << '\n';
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  write_csv_header(out);
  for (const auto& r : rows) write_csv_row(out, r);
}

std::vector<ResultRow> read_csv(std::istream& in) {
  bool ok = false;
  auto header = split_record(in, ok);
  if (!ok || header != kColumns) throw FormatError("CSV header does not match the result schema");
  std::vector<ResultRow> rows;
  int line = 1;
  while (true) {
    auto cells = split_record(in, ok);
    ++line;
    if (!ok) break;
    if (cells.size() == 1 && cells[0].empty()) continue;
    if (cells.size() != kColumns.size())
      throw FormatError("CSV line " + std::to_string(line) + ": expected " + std::to_string(kColumns.size()) +
                        " cells, got " + std::to_string(cells.size()));
    std::size_t i = 0;
    auto next = [&]() -> const std::string& { return cells[i++]; };
    auto opt_c = [&]() -> std::optional<cplx> {
      const std::string& re = next();
      const std::string& im = next();
      if (re.empty() != im.empty()) throw FormatError("CSV line " + std::to_string(line) + ": half-empty complex");
      if (re.empty()) return std::nullopt;
      return cplx(parse_double(re, kColumns[i - 2]), parse_double(im, kColumns[i - 1]));
    };
    auto opt_d = [&]() -> std::optional<double> {
      const std::string& v = next();
      if (v.empty()) return std::nullopt;
      return parse_double(v, kColumns[i - 1]);
    };
    ResultRow r;
    r.scenario = next();
    r.epsilon = parse_double(next(), "epsilon");
    r.verdict = next();
    static const std::vector<std::string> verdicts = {"Exists", "Absent", "Indeterminate", "AbsentBySolver",
                                                      "Degenerate"};
    if (std::find(verdicts.begin(), verdicts.end(), r.verdict) == verdicts.end())
      throw FormatError("CSV line " + std::to_string(line) + ": unknown verdict '" + r.verdict + "'");
    r.solver_status = next();
    r.m_tilde = opt_c();
    r.m_solved = opt_c();
    r.k_pred = opt_c();
    r.k_solved = opt_c();
    r.k_oracle = opt_d();
    r.lambda_pred = opt_c();
    r.lambda_leading = opt_c();
    r.lambda_solved = opt_c();
    r.lambda_oracle = opt_d();
    r.residual_norm = opt_d();
    if (const std::string& rc = next(); !rc.empty()) r.root_count = static_cast<int>(parse_double(rc, "root_count"));
    r.wall_ms = parse_double(next(), "wall_ms");
    r.note = next();
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_identity_csv(std::ostream& out, const IdentityReport& r) {
  out << "scenario,grid_n,identity,lhs_re,lhs_im,rhs_re,rhs_im,relative,pass\n";
  for (const auto& c : r.checks)
    out << quote(r.scenario) << ',' << r.grid_n << ',' << quote(c.name) << ',' << fmt(c.lhs.real()) << ','
        << fmt(c.lhs.imag()) << ',' << fmt(c.rhs.real()) << ',' << fmt(c.rhs.imag()) << ',' << fmt(c.relative)
        << ',' << (c.relative <= r.tolerance ? "true" : "false") << '\n';
}

}  // namespace shallowbound
