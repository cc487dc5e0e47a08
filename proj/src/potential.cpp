#include "shallowbound/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shallowbound/errors.hpp"

namespace shallowbound {

const char* to_string(Family f) {
  switch (f) {
    case Family::cosine_bump: return "cosine-bump";
    case Family::polynomial_bump: return "polynomial-bump";
    case Family::disk_indicator: return "disk-indicator";
    case Family::tabulated: return "tabulated";
  }
  return "?";
}

const char* to_string(TermOp op) {
  switch (op) {
    case TermOp::value: return "value";
    case TermOp::laplacian: return "laplacian";
    case TermOp::x_times: return "x_times";
    case TermOp::y_times: return "y_times";
  }
  return "?";
}

SampleTable::SampleTable(std::vector<double> xs, std::vector<double> ys, std::vector<cplx> values)
    : xs_(std::move(xs)), ys_(std::move(ys)), values_(std::move(values)) {
  if (xs_.size() < 2 || ys_.size() < 2) throw FormatError("sample table needs at least 2x2 points");
  if (values_.size() != xs_.size() * ys_.size()) throw FormatError("sample table is not a full lattice");
  for (const auto* a : {&xs_, &ys_})
    for (std::size_t k = 1; k < a->size(); ++k)
      if (!((*a)[k] > (*a)[k - 1])) throw FormatError("sample table coordinates must increase strictly");
}

SampleTable SampleTable::read_csv(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  if (!std::getline(in, line)) throw FormatError("empty sample table");
  ++lineno;
  {
    std::string h;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r') h += c;
    if (h != "x,y,re,im") throw FormatError("sample table header must be x,y,re,im");
  }
  struct Row {
    double x, y;
    cplx v;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double f[4];
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 4) throw FormatError("line " + std::to_string(lineno) + ": too many columns");
      try {
        std::size_t used = 0;
        std::string t = trim(cell);
        f[k] = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(lineno) + ": not a number: " + cell);
      }
      ++k;
    }
    if (k != 4) throw FormatError("line " + std::to_string(lineno) + ": expected 4 columns");
    rows.push_back({f[0], f[1], {f[2], f[3]}});
  }
  if (rows.empty()) throw FormatError("sample table has no rows");
  // Rows may come in any order; each sample is placed by its coordinates.
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (xs.size() * ys.size() != rows.size()) throw FormatError("sample table is not a regular lattice");
  std::vector<cplx> values(rows.size());
  std::vector<char> seen(rows.size(), 0);
  for (const auto& r : rows) {
    std::size_t i = std::lower_bound(xs.begin(), xs.end(), r.x) - xs.begin();
    std::size_t j = std::lower_bound(ys.begin(), ys.end(), r.y) - ys.begin();
    std::size_t idx = i * ys.size() + j;
    if (seen[idx]) throw FormatError("sample table repeats a lattice point");
    seen[idx] = 1;
    values[idx] = r.v;
  }
  return SampleTable(std::move(xs), std::move(ys), std::move(values));
}

SampleTable SampleTable::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open sample table " + path);
  return read_csv(in);
}

cplx SampleTable::at(double x, double y) const {
  if (x < xs_.front() || x > xs_.back() || y < ys_.front() || y > ys_.back()) return {};
  auto locate = [](const std::vector<double>& a, double t) {
    std::size_t i = std::upper_bound(a.begin(), a.end(), t) - a.begin();
    if (i == 0) i = 1;
    if (i >= a.size()) i = a.size() - 1;
    double s = (t - a[i - 1]) / (a[i] - a[i - 1]);
    return std::pair{i - 1, s};
  };
  auto [i, s] = locate(xs_, x);
  auto [j, t] = locate(ys_, y);
  const std::size_t ny = ys_.size();
  cplx v00 = values_[i * ny + j], v01 = values_[i * ny + j + 1];
  cplx v10 = values_[(i + 1) * ny + j], v11 = values_[(i + 1) * ny + j + 1];
  return (1 - s) * ((1 - t) * v00 + t * v01) + s * ((1 - t) * v10 + t * v11);
}

RectDomain SampleTable::bounds() const { return RectDomain(xs_.front(), xs_.back(), ys_.front(), ys_.back()); }

namespace {

constexpr double kPi = std::numbers::pi;

// Profile value and Laplacian of the unit-amplitude radial families.
double radial_value(const PotentialTerm& t, double r) {
  const double R = t.radius;
  switch (t.family) {
    case Family::cosine_bump:
      return r < R ? 0.5 * (1.0 + std::cos(kPi * r / R)) : 0.0;
    case Family::polynomial_bump: {
      double s = (r / R) * (r / R);
      return s < 1.0 ? std::pow(1.0 - s, t.exponent) : 0.0;
    }
    case Family::disk_indicator:
      return r < R ? 1.0 : 0.0;
    case Family::tabulated:
      break;
  }
  return 0.0;
}

double radial_laplacian(const PotentialTerm& t, double r) {
  const double R = t.radius;
  switch (t.family) {
    case Family::cosine_bump: {
      if (r >= R) return 0.0;
      const double w = kPi / R;
      const double x = w * r;
      const double sinc = x < 1e-8 ? 1.0 : std::sin(x) / x;
      return -0.5 * w * w * (std::cos(x) + sinc);
    }
    case Family::polynomial_bump: {
      double s = (r / R) * (r / R);
      if (s >= 1.0) return 0.0;
      const double p = t.exponent;
      double d1 = -p * std::pow(1.0 - s, p - 1.0);
      double d2 = p * (p - 1.0) * std::pow(1.0 - s, p - 2.0);
      return 4.0 / (R * R) * (s * d2 + d1);
    }
    default:
      break;
  }
  throw InvalidArgument(std::string("no analytic Laplacian for family ") + to_string(t.family));
}

}  // namespace

cplx PotentialTerm::value(double x, double y) const {
  double base;
  if (family == Family::tabulated) {
    if (op == TermOp::laplacian) throw InvalidArgument("tabulated terms have no Laplacian");
    cplx v = amplitude * table->at(x, y);
    if (op == TermOp::x_times) v *= (x - cx);
    if (op == TermOp::y_times) v *= (y - cy);
    return v;
  }
  const double r = std::hypot(x - cx, y - cy);
  switch (op) {
    case TermOp::value: base = radial_value(*this, r); break;
    case TermOp::laplacian: base = radial_laplacian(*this, r); break;
    case TermOp::x_times: base = radial_value(*this, r) * (x - cx); break;
    case TermOp::y_times: base = radial_value(*this, r) * (y - cy); break;
    default: base = 0.0;
  }
  return amplitude * base;
}

RectDomain PotentialTerm::support() const {
  if (family == Family::tabulated) return table->bounds();
  return RectDomain(cx - radius, cx + radius, cy - radius, cy + radius);
}

bool PotentialTerm::is_real() const noexcept {
  if (amplitude.imag() != 0.0) return false;
  if (family != Family::tabulated) return true;
  return std::all_of(table->values().begin(), table->values().end(), [](cplx v) { return v.imag() == 0.0; });
}

PotentialSpec::PotentialSpec(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.family == Family::tabulated) {
      if (!t.table) throw InvalidArgument("tabulated term without a sample table");
    } else {
      if (!(t.radius > 0.0) || !std::isfinite(t.radius)) throw InvalidArgument("term radius must be positive");
      if (!std::isfinite(t.cx) || !std::isfinite(t.cy)) throw InvalidArgument("term center must be finite");
    }
    if (t.family == Family::polynomial_bump && !(t.exponent >= 1.0))
      throw InvalidArgument("polynomial-bump exponent must be at least 1");
    if (t.op == TermOp::laplacian) {
      if (t.family == Family::disk_indicator || t.family == Family::tabulated)
        throw InvalidArgument(std::string("Laplacian term needs a smooth analytic family, got ") + to_string(t.family));
      if (t.family == Family::polynomial_bump && t.exponent < 2.0)
        throw InvalidArgument("Laplacian of a polynomial bump needs exponent >= 2");
    }
  }
}

PotentialSpec PotentialSpec::polynomial_bump(cplx amplitude, double cx, double cy, double radius, double p) {
  PotentialTerm t;
  t.family = Family::polynomial_bump;
  t.amplitude = amplitude;
  t.cx = cx;
  t.cy = cy;
  t.radius = radius;
  t.exponent = p;
  return PotentialSpec({t});
}

PotentialSpec PotentialSpec::cosine_bump(cplx amplitude, double cx, double cy, double radius) {
  PotentialTerm t;
  t.family = Family::cosine_bump;
  t.amplitude = amplitude;
  t.cx = cx;
  t.cy = cy;
  t.radius = radius;
  return PotentialSpec({t});
}

PotentialSpec PotentialSpec::disk(cplx amplitude, double cx, double cy, double radius) {
  PotentialTerm t;
  t.family = Family::disk_indicator;
  t.amplitude = amplitude;
  t.cx = cx;
  t.cy = cy;
  t.radius = radius;
  return PotentialSpec({t});
}

PotentialSpec PotentialSpec::tabulated(std::shared_ptr<const SampleTable> table, cplx amplitude) {
  PotentialTerm t;
  t.family = Family::tabulated;
  t.amplitude = amplitude;
  t.table = std::move(table);
  return PotentialSpec({t});
}

cplx PotentialSpec::operator()(double x, double y) const {
  cplx s{};
  for (const auto& t : terms_) s += t.value(x, y);
  return s;
}

bool PotentialSpec::is_real() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(), [](const PotentialTerm& t) { return t.is_real(); });
}

bool PotentialSpec::is_radial() const noexcept {
  if (terms_.empty()) return false;
  for (const auto& t : terms_) {
    if (t.family == Family::tabulated) return false;
    if (t.op != TermOp::value && t.op != TermOp::laplacian) return false;
    if (t.cx != terms_.front().cx || t.cy != terms_.front().cy) return false;
  }
  return true;
}

std::pair<double, double> PotentialSpec::center() const {
  if (!is_radial()) throw InvalidArgument("potential is not radial");
  return {terms_.front().cx, terms_.front().cy};
}

double PotentialSpec::support_radius() const {
  if (!is_radial()) throw InvalidArgument("potential is not radial");
  double r = 0.0;
  for (const auto& t : terms_) r = std::max(r, t.radius);
  return r;
}

cplx PotentialSpec::radial(double r) const {
  auto [cx, cy] = center();
  return (*this)(cx + r, cy);
}

std::optional<RectDomain> PotentialSpec::support() const {
  if (terms_.empty()) return std::nullopt;
  RectDomain b = terms_.front().support();
  double x0 = b.x0(), x1 = b.x1(), y0 = b.y0(), y1 = b.y1();
  for (const auto& t : terms_) {
    RectDomain s = t.support();
    x0 = std::min(x0, s.x0());
    x1 = std::max(x1, s.x1());
    y0 = std::min(y0, s.y0());
    y1 = std::max(y1, s.y1());
  }
  return RectDomain(x0, x1, y0, y1);
}

void PotentialSpec::validate(const RectDomain& domain) const {
  for (const auto& t : terms_) {
    RectDomain s = t.support();
    if (!domain.contains(s)) {
      std::ostringstream os;
      os << to_string(t.family) << " term with support [" << s.x0() << "," << s.x1() << "]x[" << s.y0() << ","
         << s.y1() << "] exceeds domain [" << domain.x0() << "," << domain.x1() << "]x[" << domain.y0() << ","
         << domain.y1() << "]";
      throw InvalidArgument(os.str());
    }
  }
}

double PotentialSpec::sup_norm() const {
  auto box = support();
  if (!box) return 0.0;
  const int n = 201;
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = box->x0() + box->width() * i / (n - 1);
      double y = box->y0() + box->height() * j / (n - 1);
      m = std::max(m, std::abs((*this)(x, y)));
    }
  return m;
}

PotentialSpec PotentialSpec::operator+(const PotentialSpec& other) const {
  std::vector<PotentialTerm> t = terms_;
  t.insert(t.end(), other.terms_.begin(), other.terms_.end());
  return PotentialSpec(std::move(t));
}

PotentialSpec PotentialSpec::scaled(cplx factor) const {
  std::vector<PotentialTerm> t = terms_;
  for (auto& term : t) term.amplitude *= factor;
  return PotentialSpec(std::move(t));
}

PotentialSpec PotentialSpec::with_op(TermOp op) const {
  std::vector<PotentialTerm> t = terms_;
  for (auto& term : t) {
    if (term.op != TermOp::value) throw InvalidArgument("with_op needs plain value terms");
    term.op = op;
  }
  return PotentialSpec(std::move(t));
}

Field sample_potential(const PotentialSpec& spec, const GridPtr& grid) {
  spec.validate(grid->domain());
  Field f(grid);
  auto x = grid->x();
  auto y = grid->y();
  for (std::size_t k = 0; k < grid->size(); ++k) f[k] = spec(x[k], y[k]);
  return f;
}

}  // namespace shallowbound
