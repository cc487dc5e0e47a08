#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace shallowbound {

using cplx = std::complex<double>;

/// Axis-aligned rectangle [x0,x1] x [y0,y1]; the support region Q.
class RectDomain {
 public:
  RectDomain(double x0, double x1, double y0, double y1);

  double x0() const noexcept { return x0_; }
  double x1() const noexcept { return x1_; }
  double y0() const noexcept { return y0_; }
  double y1() const noexcept { return y1_; }
  double width() const noexcept { return x1_ - x0_; }
  double height() const noexcept { return y1_ - y0_; }
  double area() const noexcept { return width() * height(); }
  double diameter() const noexcept;
  std::pair<double, double> center() const noexcept;

  /// Closed containment.
  bool contains(double x, double y) const noexcept;
  bool contains(const RectDomain& other) const noexcept;

  /// Nearest point of the closed rectangle.
  std::pair<double, double> clamp(double x, double y) const noexcept;
  double distance_to(double x, double y) const noexcept;

  /// Same center, sides multiplied by `factor`.
  RectDomain scaled(double factor) const;

  friend bool operator==(const RectDomain&, const RectDomain&) = default;

 private:
  double x0_, x1_, y0_, y1_;
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

enum class AxisRule { gauss_legendre, midpoint };

/// One-dimensional factor of a tensor grid.  `breakpoints` holds the panel
/// edges; a single-panel Gauss axis has breakpoints {a, b}.
struct Axis {
  AxisRule rule = AxisRule::gauss_legendre;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> breakpoints;
  int per_panel = 0;

  std::size_t size() const noexcept { return nodes.size(); }
  int panels() const noexcept { return static_cast<int>(breakpoints.size()) - 1; }
};

Axis gauss_axis(double a, double b, int n);
Axis composite_gauss_axis(std::span<const double> breakpoints, int n);
Axis midpoint_axis(double a, double b, int n);

/// Tensor-product quadrature grid.  Flattened node index is i*ny + j with i
/// running along x.  Coordinates and weights are kept as separate arrays so
/// the kernels can stream them.
class TensorGrid {
 public:
  TensorGrid(const RectDomain& domain, Axis ax, Axis ay);

  const RectDomain& domain() const noexcept { return domain_; }
  const Axis& axis_x() const noexcept { return ax_; }
  const Axis& axis_y() const noexcept { return ay_; }
  int nx() const noexcept { return static_cast<int>(ax_.size()); }
  int ny() const noexcept { return static_cast<int>(ay_.size()); }
  std::size_t size() const noexcept { return x_.size(); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny()) +
           static_cast<std::size_t>(j);
  }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> weights() const noexcept { return w_; }

  /// Single-panel Gauss-Legendre on both axes: the grids that carry a
  /// polynomial interpolant and spectral differentiation.
  bool is_spectral() const noexcept;
  bool is_lattice() const noexcept;

  /// 1D differentiation matrices of the nodal interpolant.  Throws
  /// InvalidArgument on non-spectral grids.
  const Eigen::MatrixXd& diff_x() const;
  const Eigen::MatrixXd& diff_y() const;
  const Eigen::MatrixXd& diff2_x() const;
  const Eigen::MatrixXd& diff2_y() const;
  std::span<const double> barycentric_x() const noexcept { return bx_; }
  std::span<const double> barycentric_y() const noexcept { return by_; }

  /// Node whose coordinates equal (x, y) exactly, if any.
  std::optional<std::size_t> find_node(double x, double y) const;

  /// Largest gap between consecutive nodes along either axis.
  double max_spacing() const noexcept;

 private:
  RectDomain domain_;
  Axis ax_, ay_;
  std::vector<double> x_, y_, w_;
  std::vector<double> bx_, by_;
  Eigen::MatrixXd dx_, dy_, dxx_, dyy_;
};

using GridPtr = std::shared_ptr<const TensorGrid>;

/// Tensor Gauss-Legendre grid with n nodes per axis.  n < 2 is rejected.
GridPtr build_grid(const RectDomain& domain, int n);

/// Composite grid over the rectangle `factor` times larger (odd factor),
/// made of factor x factor panels of the base rule.  The middle panel
/// reproduces the base nodes bit for bit.
GridPtr build_enlarged_grid(const TensorGrid& base, int factor = 3);

/// Cell-centred uniform lattice with n x n nodes, midpoint weights.
GridPtr build_lattice(const RectDomain& domain, int n);

/// Complex samples of a function on a grid.
class Field {
 public:
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<cplx> values);
  static Field constant(GridPtr grid, cplx value);

  const GridPtr& grid() const noexcept { return grid_; }
  const TensorGrid& grid_ref() const noexcept { return *grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx s, Field a) { return a *= s; }
  friend Field operator*(Field a, cplx s) { return a *= s; }

  /// Pointwise product.
  Field pointwise(const Field& other) const;

 private:
  void require_same_grid(const Field& other) const;

  GridPtr grid_;
  std::vector<cplx> values_;
};

/// <g> = sum of weight * value.
cplx integrate(const Field& field);

/// sqrt(<|g|^2>).
double l2_norm(const Field& field);

/// Derivative of the nodal interpolant along axis 0 (x) or 1 (y).
Field differentiate(const Field& field, int axis);

/// Value and derivatives up to second order at a point.
struct Jet {
  cplx v{}, dx{}, dy{}, dxx{}, dxy{}, dyy{};
};

/// Jets of the interpolant at every node of a spectral grid.
std::vector<Jet> nodal_jets(const Field& field);

/// Jet of the interpolant at an arbitrary point of a spectral grid's domain.
Jet interpolate_jet(const Field& field, double x, double y);

/// Value of the interpolant (spectral grids) at a point.
cplx interpolate(const Field& field, double x, double y);

}  // namespace shallowbound
