#include <cmath>
#include <numbers>

#include "shallowbound/errors.hpp"
#include "shallowbound/kernels.hpp"
#include "shallowbound/logpotential.hpp"
#include "shallowbound/rect_moments.hpp"

namespace shallowbound {

namespace {

constexpr double kInv2Pi = 0.5 / std::numbers::pi;

// Targets farther than this fraction of diam(Q) use the plain rule.
constexpr double kNearFraction = 0.05;

using Coef6 = std::array<cplx, 6>;

Coef6 taylor(const Jet& j) { return {j.v, j.dx, j.dy, 0.5 * j.dxx, j.dxy, 0.5 * j.dyy}; }

void require_spectral(const Field& g) {
  if (!g.grid_ref().is_spectral())
    throw InvalidArgument("logarithmic potential needs sources on a single-panel Gauss grid");
}

struct Sources {
  SourceView view;
  std::vector<double> re, im;
  std::vector<Jet> jets;
};

Sources prepare(const Field& g) {
  const TensorGrid& s = g.grid_ref();
  Sources src{{s.x().data(), s.y().data(), s.weights().data(), s.size()}, {}, {}, nodal_jets(g)};
  src.re.resize(g.size());
  src.im.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    src.re[k] = g[k].real();
    src.im[k] = g[k].imag();
  }
  return src;
}

// Expansion point and Taylor coefficients for a near target.
Coef6 local_taylor(const Field& g, const Sources& src, double px, double py) {
  if (auto k = g.grid_ref().find_node(px, py)) return taylor(src.jets[*k]);
  return taylor(interpolate_jet(g, px, py));
}

}  // namespace

std::vector<cplx> inverse_laplacian_at(const Field& g, std::span<const double> tx, std::span<const double> ty) {
  require_spectral(g);
  if (tx.size() != ty.size()) throw InvalidArgument("target coordinate arrays differ in length");
  const RectDomain& q = g.grid_ref().domain();
  const double near = kNearFraction * q.diameter();
  Sources src = prepare(g);
  const KernelTable& kt = kernels();
  std::vector<cplx> out(tx.size());
  parallel_for(tx.size(), [&](std::size_t b, std::size_t e) {
    double s[8];
    for (std::size_t i = b; i < e; ++i) {
      const double x = tx[i], y = ty[i];
      const bool is_near = q.distance_to(x, y) <= near;
      auto [px, py] = q.clamp(x, y);
      kt.log_sums(x, y, px, py, src.view, src.re.data(), src.im.data(), s);
      cplx v(s[0], s[1]);
      if (is_near) {
        Coef6 c = local_taylor(g, src, px, py);
        Moments6 m = log_moments(q, x, y, px, py);
        for (int a = 0; a < 6; ++a) v += c[a] * (m[a] - s[2 + a]);
      }
      out[i] = kInv2Pi * v;
    }
  });
  return out;
}

Field apply_inverse_laplacian(const Field& g, const GridPtr& targets) {
  return Field(targets, inverse_laplacian_at(g, targets->x(), targets->y()));
}

std::array<Field, 2> grad_inverse_laplacian(const Field& g, const GridPtr& targets) {
  require_spectral(g);
  const RectDomain& q = g.grid_ref().domain();
  const double near = kNearFraction * q.diameter();
  Sources src = prepare(g);
  const KernelTable& kt = kernels();
  std::array<Field, 2> out{Field(targets), Field(targets)};
  auto tx = targets->x();
  auto ty = targets->y();
  parallel_for(targets->size(), [&](std::size_t b, std::size_t e) {
    double s[16];
    for (std::size_t i = b; i < e; ++i) {
      const double x = tx[i], y = ty[i];
      const bool is_near = q.distance_to(x, y) <= near;
      auto [px, py] = q.clamp(x, y);
      kt.grad_sums(x, y, px, py, src.view, src.re.data(), src.im.data(), s);
      cplx gx(s[0], s[1]), gy(s[2], s[3]);
      if (is_near) {
        Coef6 c = local_taylor(g, src, px, py);
        GradMoments m = grad_moments(q, x, y, px, py);
        for (int a = 0; a < 6; ++a) {
          gx += c[a] * (m.x[a] - s[4 + a]);
          gy += c[a] * (m.y[a] - s[10 + a]);
        }
      }
      out[0][i] = kInv2Pi * gx;
      out[1][i] = kInv2Pi * gy;
    }
  });
  return out;
}

Eigen::MatrixXd inverse_laplacian_matrix(const GridPtr& grid) {
  if (!grid->is_spectral()) throw InvalidArgument("Nystrom matrix needs a single-panel Gauss grid");
  const TensorGrid& gr = *grid;
  const RectDomain& q = gr.domain();
  const std::size_t n = gr.size();
  const int nx = gr.nx(), ny = gr.ny();
  const Eigen::MatrixXd& dx = gr.diff_x();
  const Eigen::MatrixXd& dy = gr.diff_y();
  const Eigen::MatrixXd& dxx = gr.diff2_x();
  const Eigen::MatrixXd& dyy = gr.diff2_y();
  const SourceView view{gr.x().data(), gr.y().data(), gr.weights().data(), n};
  const KernelTable& kt = kernels();
  auto xs = gr.x();
  auto ys = gr.y();
  // Row-major storage so each target fills a contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g(n, n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double* row = g.row(r).data();
      const double tx = xs[r], ty = ys[r];
      kt.log_row(tx, ty, view, row);
      double s[6] = {};
      for (std::size_t j = 0; j < n; ++j) {
        const double ux = xs[j] - tx, uy = ys[j] - ty;
        s[0] += row[j];
        s[1] += row[j] * ux;
        s[2] += row[j] * uy;
        s[3] += row[j] * ux * ux;
        s[4] += row[j] * ux * uy;
        s[5] += row[j] * uy * uy;
      }
      Moments6 m = log_moments(q, tx, ty, tx, ty);
      double c[6];
      for (int a = 0; a < 6; ++a) c[a] = m[a] - s[a];
      const int ia = static_cast<int>(r) / ny, ib = static_cast<int>(r) % ny;
      row[r] += c[0];
      for (int k = 0; k < nx; ++k) {
        row[gr.index(k, ib)] += c[1] * dx(ia, k) + 0.5 * c[3] * dxx(ia, k);
      }
      for (int k = 0; k < ny; ++k) {
        row[gr.index(ia, k)] += c[2] * dy(ib, k) + 0.5 * c[5] * dyy(ib, k);
      }
      for (int k = 0; k < nx; ++k) {
        const double fx = c[4] * dx(ia, k);
        if (fx == 0.0) continue;
        for (int l = 0; l < ny; ++l) row[gr.index(k, l)] += fx * dy(ib, l);
      }
      for (std::size_t j = 0; j < n; ++j) row[j] *= kInv2Pi;
    }
  });
  return g;
}

}  // namespace shallowbound
