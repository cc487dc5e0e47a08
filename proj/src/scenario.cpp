#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shallowbound/errors.hpp"
#include "shallowbound/scenario.hpp"

namespace shallowbound {

namespace {

using json = nlohmann::json;

// Forward iterator over the text that keeps a running line number, so the
// SAX pass below can tell which line each value sits on.
class LineIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineIterator() = default;
  LineIterator(const char* p, int* line, bool* newline) : p_(p), line_(line), newline_(newline) {}
  reference operator*() const { return *p_; }
  LineIterator& operator++() {
    *newline_ = *p_ == '\n';
    if (*newline_) ++*line_;
    ++p_;
    return *this;
  }
  LineIterator operator++(int) {
    LineIterator t = *this;
    ++*this;
    return t;
  }
  bool operator==(const LineIterator& o) const { return p_ == o.p_; }
  bool operator!=(const LineIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  int* line_ = nullptr;
  bool* newline_ = nullptr;
};

using LineMap = std::map<std::string, int>;

class LineRecorder : public nlohmann::json_sax<json> {
 public:
  LineRecorder(const int& line, const bool& newline, LineMap& out) : line_(line), newline_(newline), out_(out) {}

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t&) override { return scalar(); }
  bool string(string_t&) override { return scalar(); }
  bool binary(binary_t&) override { return scalar(); }
  bool start_object(std::size_t) override {
    begin();
    stack_.push_back(Frame{false, 0, {}, {}});
    return true;
  }
  bool key(string_t& k) override {
    if (stack_.back().keys.count(k)) {
      error_ = "duplicate key '" + k + "'";
      error_line_ = line_;
      return false;
    }
    stack_.back().keys.insert(k);
    stack_.back().key = k;
    out_[pointer()] = line_;
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    end();
    return true;
  }
  bool start_array(std::size_t) override {
    begin();
    stack_.push_back(Frame{true, 0, {}, {}});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    end();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
    error_ = ex.what();
    error_line_ = line_;
    return false;
  }

  const std::string& error() const { return error_; }
  int error_line() const { return error_line_; }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
    std::set<std::string> keys;
  };
  std::string pointer() const {
    std::string p;
    for (const auto& f : stack_) p += "/" + (f.array ? std::to_string(f.index) : f.key);
    return p;
  }
  int current_line() const { return newline_ ? line_ - 1 : line_; }
  void begin() {
    if (!stack_.empty() && stack_.back().array) out_[pointer()] = current_line();
  }
  void end() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
  }
  bool scalar() {
    begin();
    end();
    return true;
  }

  const int& line_;
  const bool& newline_;
  LineMap& out_;
  std::vector<Frame> stack_;
  std::string error_;
  int error_line_ = 0;
};

class Reader {
 public:
  Reader(LineMap lines, std::string source, std::string base_dir)
      : lines_(std::move(lines)), source_(std::move(source)), base_(std::move(base_dir)) {}

  int line_of(std::string ptr) const {
    while (true) {
      auto it = lines_.find(ptr);
      if (it != lines_.end()) return it->second;
      auto cut = ptr.rfind('/');
      if (cut == std::string::npos || ptr.empty()) return 1;
      ptr.resize(cut);
    }
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    const int line = line_of(ptr);
    std::string where = source_.empty() ? "scenario" : source_;
    throw ValidationError(where + ":" + std::to_string(line) + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg, line);
  }

  void only(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) fail(ptr + "/" + it.key(), "unknown field '" + it.key() + "'");
    }
  }

  const json& need(const json& obj, const std::string& ptr, const char* key) const {
    if (!obj.contains(key)) fail(ptr, std::string("missing required field '") + key + "'");
    return obj.at(key);
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ptr, "expected a finite number");
    return d;
  }

  int integer(const json& v, const std::string& ptr) const {
    if (!v.is_number_integer()) fail(ptr, "expected an integer");
    return v.get<int>();
  }

  std::string text(const json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  bool flag(const json& v, const std::string& ptr) const {
    if (!v.is_boolean()) fail(ptr, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const json& v, const std::string& ptr, std::size_t n = 0) const {
    if (!v.is_array()) fail(ptr, "expected an array of numbers");
    if (n && v.size() != n) fail(ptr, "expected " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  cplx complex(const json& v, const std::string& ptr) const {
    if (v.is_number()) return number(v, ptr);
    auto p = numbers(v, ptr, 2);
    return {p[0], p[1]};
  }

  RectDomain rect(const json& v, const std::string& ptr) const {
    auto b = numbers(v, ptr, 4);
    try {
      return RectDomain(b[0], b[1], b[2], b[3]);
    } catch (const InvalidArgument& e) {
      fail(ptr, e.what());
    }
  }

  std::shared_ptr<const SampleTable> table(const json& v, const std::string& ptr) const {
    try {
      if (v.is_string()) {
        std::filesystem::path p(v.get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_) / p;
        return std::make_shared<const SampleTable>(SampleTable::read_csv_file(p.string()));
      }
      only(v, ptr, {"x", "y", "re", "im"});
      auto xs = numbers(need(v, ptr, "x"), ptr + "/x");
      auto ys = numbers(need(v, ptr, "y"), ptr + "/y");
      auto re = numbers(need(v, ptr, "re"), ptr + "/re", xs.size() * ys.size());
      std::vector<double> im(re.size(), 0.0);
      if (v.contains("im")) im = numbers(v["im"], ptr + "/im", re.size());
      std::vector<cplx> vals(re.size());
      for (std::size_t i = 0; i < re.size(); ++i) vals[i] = {re[i], im[i]};
      return std::make_shared<const SampleTable>(std::move(xs), std::move(ys), std::move(vals));
    } catch (const FormatError& e) {
      fail(ptr, e.what());
    } catch (const InvalidArgument& e) {
      fail(ptr, e.what());
    }
  }

  PotentialTerm term(const json& v, const std::string& ptr) const {
    only(v, ptr, {"family", "amplitude", "center", "radius", "exponent", "op", "table"});
    PotentialTerm t;
    const std::string fam = text(need(v, ptr, "family"), ptr + "/family");
    if (fam == "polynomial_bump") {
      t.family = Family::polynomial_bump;
    } else if (fam == "cosine_bump") {
      t.family = Family::cosine_bump;
    } else if (fam == "disk") {
      t.family = Family::disk_indicator;
    } else if (fam == "tabulated") {
      t.family = Family::tabulated;
    } else {
      fail(ptr + "/family", "unknown family '" + fam + "'");
    }
    if (v.contains("amplitude")) t.amplitude = complex(v["amplitude"], ptr + "/amplitude");
    if (t.family == Family::tabulated) {
      for (const char* k : {"center", "radius", "exponent"})
        if (v.contains(k)) fail(ptr + "/" + k, "not used by tabulated terms");
      t.table = table(need(v, ptr, "table"), ptr + "/table");
    } else {
      if (v.contains("table")) fail(ptr + "/table", "only tabulated terms take a table");
      if (v.contains("center")) {
        auto c = numbers(v["center"], ptr + "/center", 2);
        t.cx = c[0];
        t.cy = c[1];
      }
      if (v.contains("radius")) t.radius = number(v["radius"], ptr + "/radius");
      if (!(t.radius > 0.0)) fail(ptr + "/radius", "radius must be positive");
      if (v.contains("exponent")) {
        if (t.family != Family::polynomial_bump) fail(ptr + "/exponent", "only polynomial bumps take an exponent");
        t.exponent = number(v["exponent"], ptr + "/exponent");
      }
      if (t.family == Family::polynomial_bump && !(t.exponent >= 1.0))
        fail(ptr + "/exponent", "exponent must be at least 1");
    }
    if (v.contains("op")) {
      const std::string op = text(v["op"], ptr + "/op");
      if (op == "value") {
        t.op = TermOp::value;
      } else if (op == "laplacian") {
        t.op = TermOp::laplacian;
      } else if (op == "x_times") {
        t.op = TermOp::x_times;
      } else if (op == "y_times") {
        t.op = TermOp::y_times;
      } else {
        fail(ptr + "/op", "unknown op '" + op + "'");
      }
      if (t.op == TermOp::laplacian) {
        if (t.family == Family::tabulated || t.family == Family::disk_indicator)
          fail(ptr + "/op", "laplacian needs a smooth family");
        if (t.family == Family::polynomial_bump && !(t.exponent >= 2.0))
          fail(ptr + "/exponent", "laplacian of a polynomial bump needs exponent >= 2");
      }
      if (t.family == Family::tabulated && t.op != TermOp::value) fail(ptr + "/op", "tabulated terms take op 'value'");
    }
    return t;
  }

  PotentialSpec spec(const json& v, const std::string& ptr) const {
    if (!v.is_array()) fail(ptr, "expected an array of terms");
    std::vector<PotentialTerm> terms;
    for (std::size_t i = 0; i < v.size(); ++i) terms.push_back(term(v[i], ptr + "/" + std::to_string(i)));
    return PotentialSpec(std::move(terms));
  }

  Multiplicative multiplicative(const json& v, const std::string& ptr) const {
    Multiplicative m;
    m.v = spec(need(v, ptr, "v"), ptr + "/v");
    if (v.contains("v1")) m.v1 = spec(v["v1"], ptr + "/v1");
    return m;
  }

  RankOne rank_one(const json& v, const std::string& ptr) const {
    return RankOne{spec(need(v, ptr, "rho"), ptr + "/rho"), rect(need(v, ptr, "region"), ptr + "/region")};
  }

  Perturbation perturbation(const json& v, const std::string& ptr) const {
    if (!v.is_object()) fail(ptr, "expected an object");
    const std::string kind = text(need(v, ptr, "kind"), ptr + "/kind");
    std::optional<double> bound;
    if (v.contains("bound_constant")) bound = number(v["bound_constant"], ptr + "/bound_constant");
    auto make = [&](Perturbation::Variant var) {
      try {
        return Perturbation(std::move(var), bound);
      } catch (const InvalidArgument& e) {
        fail(ptr + "/bound_constant", e.what());
      }
    };
    if (kind == "multiplicative") {
      only(v, ptr, {"kind", "v", "v1", "bound_constant"});
      return make(multiplicative(v, ptr));
    }
    if (kind == "rank_one") {
      only(v, ptr, {"kind", "rho", "region", "bound_constant"});
      return make(rank_one(v, ptr));
    }
    if (kind == "divergence_form") {
      only(v, ptr, {"kind", "a", "b", "zero_order", "bound_constant"});
      DivergenceForm d;
      if (v.contains("a")) {
        const json& a = v["a"];
        only(a, ptr + "/a", {"11", "12", "21", "22"});
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const std::string key = std::to_string(i + 1) + std::to_string(j + 1);
            if (a.contains(key)) d.a[i][j] = spec(a[key], ptr + "/a/" + key);
          }
      }
      if (v.contains("b")) {
        const json& b = v["b"];
        only(b, ptr + "/b", {"1", "2"});
        for (int i = 0; i < 2; ++i) {
          const std::string key = std::to_string(i + 1);
          if (b.contains(key)) d.b[i] = spec(b[key], ptr + "/b/" + key);
        }
      }
      const std::string zp = ptr + "/zero_order";
      const json& z = need(v, ptr, "zero_order");
      if (!z.is_object()) fail(zp, "expected an object");
      const std::string zk = text(need(z, zp, "kind"), zp + "/kind");
      if (zk == "multiplicative") {
        only(z, zp, {"kind", "v", "v1"});
        d.zero_order = multiplicative(z, zp);
      } else if (zk == "rank_one") {
        only(z, zp, {"kind", "rho", "region"});
        d.zero_order = rank_one(z, zp);
      } else {
        fail(zp + "/kind", "zero_order kind must be 'multiplicative' or 'rank_one'");
      }
      return make(std::move(d));
    }
    fail(ptr + "/kind", "unknown perturbation kind '" + kind + "'");
  }

  void params(const json& v, const std::string& ptr, ScenarioParams& p) const {
    only(v, ptr,
         {"grid_n", "terms", "alpha", "margin", "max_k", "tolerance", "max_iterations", "condition_limit", "eval_n",
          "count_roots", "sector"});
    if (v.contains("grid_n")) p.grid_n = integer(v["grid_n"], ptr + "/grid_n");
    if (v.contains("terms")) p.terms = integer(v["terms"], ptr + "/terms");
    if (v.contains("alpha")) p.alpha = number(v["alpha"], ptr + "/alpha");
    if (v.contains("margin")) p.margin = number(v["margin"], ptr + "/margin");
    if (v.contains("max_k")) p.solver.max_k = number(v["max_k"], ptr + "/max_k");
    if (v.contains("tolerance")) p.solver.tolerance = number(v["tolerance"], ptr + "/tolerance");
    if (v.contains("max_iterations")) p.solver.max_iterations = integer(v["max_iterations"], ptr + "/max_iterations");
    if (v.contains("condition_limit"))
      p.solver.condition_limit = number(v["condition_limit"], ptr + "/condition_limit");
    if (v.contains("eval_n")) p.eval_n = integer(v["eval_n"], ptr + "/eval_n");
    if (v.contains("count_roots")) p.count_roots = flag(v["count_roots"], ptr + "/count_roots");
    if (v.contains("sector")) {
      const std::string sp = ptr + "/sector";
      const json& s = v["sector"];
      only(s, sp, {"r_min", "r_max", "half_angle"});
      if (s.contains("r_min")) p.sector.r_min = number(s["r_min"], sp + "/r_min");
      if (s.contains("r_max")) p.sector.r_max = number(s["r_max"], sp + "/r_max");
      if (s.contains("half_angle")) p.sector.half_angle = number(s["half_angle"], sp + "/half_angle");
      if (!(p.sector.r_min > 0.0 && p.sector.r_min < p.sector.r_max))
        fail(sp, "sector needs 0 < r_min < r_max");
      if (!(p.sector.half_angle > 0.0 && p.sector.half_angle < 0.5 * std::numbers::pi))
        fail(sp + "/half_angle", "half_angle must lie in (0, pi/2)");
    }
    check_params(p, ptr);
  }

  void check_params(const ScenarioParams& p, const std::string& ptr) const {
    if (p.grid_n < 4 || p.grid_n > 256) fail(ptr + "/grid_n", "grid_n must lie in [4, 256]");
    if (p.terms < 0 || p.terms > 12) fail(ptr + "/terms", "terms must lie in [0, 12]");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail(ptr + "/alpha", "alpha must lie in (0, 1)");
    if (!(p.margin >= 0.0)) fail(ptr + "/margin", "margin must be non-negative");
    if (!(p.solver.max_k > 0.0)) fail(ptr + "/max_k", "max_k must be positive");
    if (!(p.solver.tolerance > 0.0)) fail(ptr + "/tolerance", "tolerance must be positive");
    if (p.solver.max_iterations < 1) fail(ptr + "/max_iterations", "max_iterations must be positive");
    if (!(p.solver.condition_limit > 1.0)) fail(ptr + "/condition_limit", "condition_limit must exceed 1");
    if (p.eval_n < 8 || p.eval_n > 1024) fail(ptr + "/eval_n", "eval_n must lie in [8, 1024]");
  }

  void expectation(const json& v, const std::string& ptr, Expectation& e) const {
    only(v, ptr, {"verdict", "solver", "root_count", "residual_max", "oracle_tolerance"});
    try {
      if (v.contains("verdict")) e.verdict = parse_verdict(text(v["verdict"], ptr + "/verdict"));
    } catch (const InvalidArgument& x) {
      fail(ptr + "/verdict", x.what());
    }
    try {
      if (v.contains("solver")) e.solver = parse_solve_status(text(v["solver"], ptr + "/solver"));
    } catch (const InvalidArgument& x) {
      fail(ptr + "/solver", x.what());
    }
    if (v.contains("root_count")) e.root_count = integer(v["root_count"], ptr + "/root_count");
    if (v.contains("residual_max")) e.residual_max = number(v["residual_max"], ptr + "/residual_max");
    if (v.contains("oracle_tolerance")) e.oracle_tolerance = number(v["oracle_tolerance"], ptr + "/oracle_tolerance");
  }

 private:
  LineMap lines_;
  std::string source_;
  std::string base_;
};

Scenario parse_with_source(const std::string& text, const std::string& base_dir, const std::string& source) {
  int line = 1;
  bool newline = false;
  LineMap lines;
  LineRecorder rec(line, newline, lines);
  LineIterator first(text.data(), &line, &newline), last(text.data() + text.size(), &line, &newline);
  const std::string where = source.empty() ? "scenario" : source;
  if (!json::sax_parse(first, last, &rec)) {
    throw ValidationError(where + ":" + std::to_string(rec.error_line()) + ": " + rec.error(), rec.error_line());
  }
  json doc = json::parse(text);
  Reader r(std::move(lines), source, base_dir);
  r.only(doc, "",
         {"version", "name", "description", "domain", "perturbation", "epsilons", "solver", "seed", "eps0",
          "expect"});
  const int version = r.integer(r.need(doc, "", "version"), "/version");
  if (version != kScenarioVersion)
    r.fail("/version", "unsupported version " + std::to_string(version) + " (expected " +
                           std::to_string(kScenarioVersion) + ")");
  Scenario s;
  s.source = source;
  s.name = r.text(r.need(doc, "", "name"), "/name");
  if (s.name.empty()) r.fail("/name", "name must not be empty");
  for (char c : s.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      r.fail("/name", "name may contain letters, digits, '_' and '-' only");
  if (doc.contains("description")) s.description = r.text(doc["description"], "/description");
  s.domain = r.rect(r.need(doc, "", "domain"), "/domain");
  s.perturbation = r.perturbation(r.need(doc, "", "perturbation"), "/perturbation");
  try {
    s.perturbation.validate(s.domain);
  } catch (const InvalidArgument& e) {
    r.fail("/perturbation", e.what());
  }
  s.epsilons = r.numbers(r.need(doc, "", "epsilons"), "/epsilons");
  if (s.epsilons.empty()) r.fail("/epsilons", "at least one eps is required");
  for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
    const std::string p = "/epsilons/" + std::to_string(i);
    if (!(s.epsilons[i] > 0.0)) r.fail(p, "eps must be positive");
    if (i > 0 && !(s.epsilons[i] < s.epsilons[i - 1])) r.fail(p, "epsilons must be strictly descending");
  }
  if (doc.contains("solver")) r.params(doc["solver"], "/solver", s.params);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) r.fail("/seed", "seed must be a non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("eps0")) {
    s.eps0 = r.number(doc["eps0"], "/eps0");
    if (!(*s.eps0 > 0.0)) r.fail("/eps0", "eps0 must be positive");
  }
  if (doc.contains("expect")) r.expectation(doc["expect"], "/expect", s.expect);
  return s;
}

}  // namespace

Verdict parse_verdict(const std::string& s) {
  if (s == "Exists") return Verdict::exists;
  if (s == "Absent") return Verdict::absent;
  if (s == "Indeterminate") return Verdict::indeterminate;
  throw InvalidArgument("unknown verdict '" + s + "'");
}

SolveStatus parse_solve_status(const std::string& s) {
  if (s == "converged") return SolveStatus::converged;
  if (s == "absent_by_solver") return SolveStatus::absent_by_solver;
  throw InvalidArgument("unknown solver status '" + s + "'");
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  return parse_with_source(text, base_dir, "");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  const std::filesystem::path p(path);
  return parse_with_source(os.str(), p.has_parent_path() ? p.parent_path().string() : ".", path);
}

void apply_overrides(Scenario& s, const Overrides& o) {
  ScenarioParams p = s.params;
  if (o.grid_n) p.grid_n = *o.grid_n;
  if (o.terms) p.terms = *o.terms;
  if (o.alpha) p.alpha = *o.alpha;
  if (o.margin) p.margin = *o.margin;
  Reader r({}, "command line", ".");
  try {
    r.check_params(p, "");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    throw ValidationError("command line override rejected: " + msg.substr(msg.find(": ") + 2), 0);
  }
  s.params = p;
}

}  // namespace shallowbound
