#include "shallowbound/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shallowbound/errors.hpp"

namespace shallowbound {

RectDomain::RectDomain(double x0, double x1, double y0, double y1)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
  if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1)))
    throw InvalidArgument("domain bounds must be finite");
  if (!(x0 < x1) || !(y0 < y1))
    throw InvalidArgument("domain must satisfy x0 < x1 and y0 < y1");
}

double RectDomain::diameter() const noexcept { return std::hypot(width(), height()); }

std::pair<double, double> RectDomain::center() const noexcept {
  return {0.5 * (x0_ + x1_), 0.5 * (y0_ + y1_)};
}

bool RectDomain::contains(double x, double y) const noexcept {
  return x >= x0_ && x <= x1_ && y >= y0_ && y <= y1_;
}

bool RectDomain::contains(const RectDomain& o) const noexcept {
  return o.x0_ >= x0_ && o.x1_ <= x1_ && o.y0_ >= y0_ && o.y1_ <= y1_;
}

std::pair<double, double> RectDomain::clamp(double x, double y) const noexcept {
  return {std::clamp(x, x0_, x1_), std::clamp(y, y0_, y1_)};
}

double RectDomain::distance_to(double x, double y) const noexcept {
  auto [px, py] = clamp(x, y);
  return std::hypot(x - px, y - py);
}

RectDomain RectDomain::scaled(double factor) const {
  if (!(factor > 0)) throw InvalidArgument("scale factor must be positive");
  auto [cx, cy] = center();
  double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
  return RectDomain(cx - hw, cx + hw, cy - hh, cy + hh);
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Axis gauss_axis(double a, double b, int n) {
  double br[2] = {a, b};
  return composite_gauss_axis(br, n);
}

Axis composite_gauss_axis(std::span<const double> breakpoints, int n) {
  if (n < 2) throw InvalidArgument("grid needs at least 2 nodes per panel, got " + std::to_string(n));
  if (breakpoints.size() < 2) throw InvalidArgument("axis needs at least one panel");
  for (std::size_t p = 1; p < breakpoints.size(); ++p)
    if (!(breakpoints[p] > breakpoints[p - 1]))
      throw InvalidArgument("axis breakpoints must increase");
  GaussRule g = gauss_legendre(n);
  Axis ax;
  ax.rule = AxisRule::gauss_legendre;
  ax.per_panel = n;
  ax.breakpoints.assign(breakpoints.begin(), breakpoints.end());
  for (std::size_t p = 1; p < breakpoints.size(); ++p) {
    double a = breakpoints[p - 1], b = breakpoints[p];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < n; ++k) {
      ax.nodes.push_back(mid + half * g.nodes[k]);
      ax.weights.push_back(half * g.weights[k]);
    }
  }
  return ax;
}

Axis midpoint_axis(double a, double b, int n) {
  if (n < 2) throw InvalidArgument("lattice needs at least 2 nodes per axis");
  if (!(b > a)) throw InvalidArgument("lattice interval must be nonempty");
  Axis ax;
  ax.rule = AxisRule::midpoint;
  ax.per_panel = n;
  ax.breakpoints = {a, b};
  double h = (b - a) / n;
  for (int k = 0; k < n; ++k) {
    ax.nodes.push_back(a + (k + 0.5) * h);
    ax.weights.push_back(h);
  }
  return ax;
}

namespace {

// Barycentric weights for Gauss-Legendre nodes: (-1)^j sqrt((1 - xi^2) w).
std::vector<double> gauss_barycentric(int n) {
  GaussRule g = gauss_legendre(n);
  std::vector<double> lam(n);
  for (int j = 0; j < n; ++j) {
    double v = std::sqrt((1.0 - g.nodes[j] * g.nodes[j]) * g.weights[j]);
    lam[j] = (j % 2 == 0) ? v : -v;
  }
  return lam;
}

Eigen::MatrixXd diff_matrix(const std::vector<double>& x, const std::vector<double>& lam) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      d(i, j) = (lam[j] / lam[i]) / (x[i] - x[j]);
      s += d(i, j);
    }
    d(i, i) = -s;
  }
  return d;
}

}  // namespace

TensorGrid::TensorGrid(const RectDomain& domain, Axis ax, Axis ay)
    : domain_(domain), ax_(std::move(ax)), ay_(std::move(ay)) {
  if (ax_.size() < 2 || ay_.size() < 2) throw InvalidArgument("grid needs at least 2 nodes per axis");
  if (ax_.nodes.size() != ax_.weights.size() || ay_.nodes.size() != ay_.weights.size())
    throw InvalidArgument("axis nodes and weights differ in length");
  const std::size_t nx = ax_.size(), ny = ay_.size();
  x_.resize(nx * ny);
  y_.resize(nx * ny);
  w_.resize(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::size_t k = i * ny + j;
      x_[k] = ax_.nodes[i];
      y_[k] = ay_.nodes[j];
      w_[k] = ax_.weights[i] * ay_.weights[j];
    }
  if (is_spectral()) {
    bx_ = gauss_barycentric(static_cast<int>(nx));
    by_ = gauss_barycentric(static_cast<int>(ny));
    dx_ = diff_matrix(ax_.nodes, bx_);
    dy_ = diff_matrix(ay_.nodes, by_);
    dxx_ = dx_ * dx_;
    dyy_ = dy_ * dy_;
  }
}

bool TensorGrid::is_spectral() const noexcept {
  return ax_.rule == AxisRule::gauss_legendre && ay_.rule == AxisRule::gauss_legendre &&
         ax_.panels() == 1 && ay_.panels() == 1;
}

bool TensorGrid::is_lattice() const noexcept {
  return ax_.rule == AxisRule::midpoint && ay_.rule == AxisRule::midpoint;
}

namespace {
const Eigen::MatrixXd& require(const Eigen::MatrixXd& m, bool ok) {
  if (!ok) throw InvalidArgument("differentiation needs a single-panel Gauss grid");
  return m;
}
}  // namespace

const Eigen::MatrixXd& TensorGrid::diff_x() const { return require(dx_, is_spectral()); }
const Eigen::MatrixXd& TensorGrid::diff_y() const { return require(dy_, is_spectral()); }
const Eigen::MatrixXd& TensorGrid::diff2_x() const { return require(dxx_, is_spectral()); }
const Eigen::MatrixXd& TensorGrid::diff2_y() const { return require(dyy_, is_spectral()); }

std::optional<std::size_t> TensorGrid::find_node(double x, double y) const {
  auto ix = std::lower_bound(ax_.nodes.begin(), ax_.nodes.end(), x);
  auto iy = std::lower_bound(ay_.nodes.begin(), ay_.nodes.end(), y);
  if (ix == ax_.nodes.end() || *ix != x || iy == ay_.nodes.end() || *iy != y) return std::nullopt;
  return index(static_cast<int>(ix - ax_.nodes.begin()), static_cast<int>(iy - ay_.nodes.begin()));
}

double TensorGrid::max_spacing() const noexcept {
  double h = 0.0;
  for (const Axis* a : {&ax_, &ay_})
    for (std::size_t k = 1; k < a->size(); ++k) h = std::max(h, a->nodes[k] - a->nodes[k - 1]);
  return h;
}

GridPtr build_grid(const RectDomain& domain, int n) {
  if (n < 2) throw InvalidArgument("grid size must be at least 2, got " + std::to_string(n));
  return std::make_shared<const TensorGrid>(domain, gauss_axis(domain.x0(), domain.x1(), n),
                                            gauss_axis(domain.y0(), domain.y1(), n));
}

GridPtr build_enlarged_grid(const TensorGrid& base, int factor) {
  if (factor < 1 || factor % 2 == 0) throw InvalidArgument("enlargement factor must be odd and positive");
  if (base.axis_x().rule != AxisRule::gauss_legendre || base.axis_y().rule != AxisRule::gauss_legendre)
    throw InvalidArgument("enlarged grid needs a Gauss base grid");
  const RectDomain& d = base.domain();
  const int side = factor / 2;
  auto breaks = [&](double a, double b) {
    std::vector<double> br;
    double w = b - a;
    for (int p = side; p >= 1; --p) br.push_back(a - p * w);
    br.push_back(a);
    br.push_back(b);
    for (int p = 1; p <= side; ++p) br.push_back(b + p * w);
    return br;
  };
  auto bxs = breaks(d.x0(), d.x1());
  auto bys = breaks(d.y0(), d.y1());
  Axis ax = composite_gauss_axis(bxs, base.axis_x().per_panel);
  Axis ay = composite_gauss_axis(bys, base.axis_y().per_panel);
  // Middle panel must coincide exactly with the base nodes.
  const int px = base.axis_x().per_panel, py = base.axis_y().per_panel;
  for (int k = 0; k < px; ++k) {
    ax.nodes[side * px + k] = base.axis_x().nodes[k];
    ax.weights[side * px + k] = base.axis_x().weights[k];
  }
  for (int k = 0; k < py; ++k) {
    ay.nodes[side * py + k] = base.axis_y().nodes[k];
    ay.weights[side * py + k] = base.axis_y().weights[k];
  }
  RectDomain big(bxs.front(), bxs.back(), bys.front(), bys.back());
  return std::make_shared<const TensorGrid>(big, std::move(ax), std::move(ay));
}

GridPtr build_lattice(const RectDomain& domain, int n) {
  return std::make_shared<const TensorGrid>(domain, midpoint_axis(domain.x0(), domain.x1(), n),
                                            midpoint_axis(domain.y0(), domain.y1(), n));
}

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw InvalidArgument("field needs a grid");
  values_.assign(grid_->size(), cplx{});
}

Field::Field(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("field needs a grid");
  if (values_.size() != grid_->size())
    throw InvalidArgument("field has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_->size()) + " nodes");
}

Field Field::constant(GridPtr grid, cplx value) {
  Field f(std::move(grid));
  std::fill(f.values_.begin(), f.values_.end(), value);
  return f;
}

void Field::require_same_grid(const Field& other) const {
  if (grid_ != other.grid_) throw InvalidArgument("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

Field Field::pointwise(const Field& other) const {
  require_same_grid(other);
  Field out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] * other.values_[i];
  return out;
}

cplx integrate(const Field& field) {
  auto w = field.grid_ref().weights();
  auto v = field.values();
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    re += w[i] * v[i].real();
    im += w[i] * v[i].imag();
  }
  return {re, im};
}

double l2_norm(const Field& field) {
  auto w = field.grid_ref().weights();
  auto v = field.values();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::norm(v[i]);
  return std::sqrt(s);
}

namespace {

// out(i,j) = sum_m D(i,m) g(m,j) along x, or sum_m D(j,m) g(i,m) along y.
void apply_axis(const Eigen::MatrixXd& d, std::span<const cplx> g, std::span<cplx> out, int nx, int ny,
                int axis) {
  if (axis == 0) {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        cplx s{};
        for (int m = 0; m < nx; ++m) s += d(i, m) * g[static_cast<std::size_t>(m) * ny + j];
        out[static_cast<std::size_t>(i) * ny + j] = s;
      }
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        cplx s{};
        for (int m = 0; m < ny; ++m) s += d(j, m) * g[static_cast<std::size_t>(i) * ny + m];
        out[static_cast<std::size_t>(i) * ny + j] = s;
      }
  }
}

}  // namespace

Field differentiate(const Field& field, int axis) {
  const TensorGrid& g = field.grid_ref();
  if (axis != 0 && axis != 1) throw InvalidArgument("axis must be 0 or 1");
  Field out(field.grid());
  apply_axis(axis == 0 ? g.diff_x() : g.diff_y(), field.values(), out.values(), g.nx(), g.ny(), axis);
  return out;
}

std::vector<Jet> nodal_jets(const Field& field) {
  const TensorGrid& g = field.grid_ref();
  const int nx = g.nx(), ny = g.ny();
  const std::size_t n = g.size();
  std::vector<cplx> dx(n), dy(n), dxx(n), dyy(n), dxy(n);
  apply_axis(g.diff_x(), field.values(), dx, nx, ny, 0);
  apply_axis(g.diff_y(), field.values(), dy, nx, ny, 1);
  apply_axis(g.diff2_x(), field.values(), dxx, nx, ny, 0);
  apply_axis(g.diff2_y(), field.values(), dyy, nx, ny, 1);
  apply_axis(g.diff_y(), dx, dxy, nx, ny, 1);
  std::vector<Jet> jets(n);
  for (std::size_t k = 0; k < n; ++k) jets[k] = {field[k], dx[k], dy[k], dxx[k], dxy[k], dyy[k]};
  return jets;
}

namespace {

// Lagrange basis values and first two derivatives at t.
struct Basis1D {
  std::vector<double> l, d1, d2;
};

Basis1D lagrange_basis(const std::vector<double>& x, std::span<const double> lam, const Eigen::MatrixXd& d,
                       const Eigen::MatrixXd& dd, double t) {
  const int n = static_cast<int>(x.size());
  Basis1D b;
  b.l.assign(n, 0.0);
  b.d1.assign(n, 0.0);
  b.d2.assign(n, 0.0);
  const double span = x.back() - x.front();
  for (int k = 0; k < n; ++k) {
    if (std::abs(t - x[k]) <= 1e-10 * span) {
      b.l[k] = 1.0;
      for (int j = 0; j < n; ++j) {
        b.d1[j] = d(k, j);
        b.d2[j] = dd(k, j);
      }
      return b;
    }
  }
  std::vector<double> inv(n);
  double s = 0.0, s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < n; ++j) {
    inv[j] = 1.0 / (t - x[j]);
    s += lam[j] * inv[j];
    s1 += inv[j];
    s2 += inv[j] * inv[j];
  }
  for (int j = 0; j < n; ++j) {
    double l = lam[j] * inv[j] / s;
    double g = s1 - inv[j];
    b.l[j] = l;
    b.d1[j] = l * g;
    b.d2[j] = l * (g * g - s2 + inv[j] * inv[j]);
  }
  return b;
}

}  // namespace

Jet interpolate_jet(const Field& field, double x, double y) {
  const TensorGrid& g = field.grid_ref();
  if (!g.is_spectral()) throw InvalidArgument("interpolation needs a single-panel Gauss grid");
  Basis1D bx = lagrange_basis(g.axis_x().nodes, g.barycentric_x(), g.diff_x(), g.diff2_x(), x);
  Basis1D by = lagrange_basis(g.axis_y().nodes, g.barycentric_y(), g.diff_y(), g.diff2_y(), y);
  const int nx = g.nx(), ny = g.ny();
  Jet jet;
  auto v = field.values();
  for (int i = 0; i < nx; ++i) {
    cplx r0{}, r1{}, r2{};
    const std::size_t row = static_cast<std::size_t>(i) * ny;
    for (int j = 0; j < ny; ++j) {
      r0 += by.l[j] * v[row + j];
      r1 += by.d1[j] * v[row + j];
      r2 += by.d2[j] * v[row + j];
    }
    jet.v += bx.l[i] * r0;
    jet.dx += bx.d1[i] * r0;
    jet.dxx += bx.d2[i] * r0;
    jet.dy += bx.l[i] * r1;
    jet.dxy += bx.d1[i] * r1;
    jet.dyy += bx.l[i] * r2;
  }
  return jet;
}

cplx interpolate(const Field& field, double x, double y) { return interpolate_jet(field, x, y).v; }

}  // namespace shallowbound
