#include <algorithm>
#include <cmath>

#include "shallowbound/errors.hpp"
#include "shallowbound/kernels.hpp"
#include "shallowbound/logpotential.hpp"

namespace shallowbound {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double default_bound(const Perturbation::Variant& kind) {
  auto zero = overloaded{
      [](const Multiplicative& m) { return m.v.sup_norm() + (m.v1 ? m.v1->sup_norm() : 0.0); },
      [](const RankOne& r) {
        auto box = r.rho.support();
        return box ? r.rho.sup_norm() * box->area() : 0.0;
      },
  };
  return std::visit(overloaded{
                        [&](const Multiplicative& m) { return zero(m); },
                        [&](const RankOne& r) { return zero(r); },
                        [&](const DivergenceForm& d) {
                          double s = std::visit(zero, d.zero_order);
                          for (const auto& row : d.a)
                            for (const auto& c : row) s += c.sup_norm();
                          for (const auto& c : d.b) s += c.sup_norm();
                          return s;
                        },
                    },
                    kind);
}

}  // namespace

Perturbation::Perturbation(Variant kind, std::optional<double> bound_constant) : kind_(std::move(kind)) {
  if (bound_constant) {
    if (!(*bound_constant > 0.0) || !std::isfinite(*bound_constant))
      throw InvalidArgument("bound constant must be positive");
    bound_constant_ = *bound_constant;
  } else {
    bound_constant_ = std::max(default_bound(kind_), 1e-300);
  }
}

const char* Perturbation::kind_name() const noexcept {
  switch (kind_.index()) {
    case 0: return "multiplicative";
    case 1: return "rank-one";
    default: return "divergence-form";
  }
}

bool Perturbation::is_real() const noexcept {
  auto zero = overloaded{
      [](const Multiplicative& m) { return m.v.is_real() && (!m.v1 || m.v1->is_real()); },
      [](const RankOne& r) { return r.rho.is_real(); },
  };
  return std::visit(overloaded{
                        [&](const Multiplicative& m) { return zero(m); },
                        [&](const RankOne& r) { return zero(r); },
                        [&](const DivergenceForm& d) {
                          bool ok = std::visit(zero, d.zero_order);
                          for (const auto& row : d.a)
                            for (const auto& c : row) ok = ok && c.is_real();
                          for (const auto& c : d.b) ok = ok && c.is_real();
                          return ok;
                        },
                    },
                    kind_);
}

void Perturbation::validate(const RectDomain& domain) const {
  auto zero = overloaded{
      [&](const Multiplicative& m) {
        m.v.validate(domain);
        if (m.v1) m.v1->validate(domain);
      },
      [&](const RankOne& r) {
        if (!domain.contains(r.domain)) throw InvalidArgument("rank-one region Q exceeds the grid domain");
        r.rho.validate(r.domain);
      },
  };
  std::visit(overloaded{
                 [&](const Multiplicative& m) { zero(m); },
                 [&](const RankOne& r) { zero(r); },
                 [&](const DivergenceForm& d) {
                   std::visit(zero, d.zero_order);
                   for (const auto& row : d.a)
                     for (const auto& c : row) c.validate(domain);
                   for (const auto& c : d.b) c.validate(domain);
                 },
             },
             kind_);
}

namespace {

std::vector<cplx> sample(const PotentialSpec& s, const TensorGrid& g) {
  std::vector<cplx> v(g.size());
  auto x = g.x();
  auto y = g.y();
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = s(x[k], y[k]);
  return v;
}

// -W^{-1} D^T W along one axis.
Eigen::MatrixXd adjoint_derivative(const Eigen::MatrixXd& d, const std::vector<double>& w) {
  const Eigen::Index n = d.rows();
  Eigen::MatrixXd e(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index m = 0; m < n; ++m) e(a, m) = -d(m, a) * w[m] / w[a];
  return e;
}

// out(i,j) = sum_m d(i,m) in(m,j) along x (axis 0) or along y (axis 1).
void along(const Eigen::MatrixXd& d, const cplx* in, cplx* out, int nx, int ny, int axis) {
  if (axis == 0) {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        cplx s{};
        for (int m = 0; m < nx; ++m) s += d(i, m) * in[m * ny + j];
        out[i * ny + j] = s;
      }
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        cplx s{};
        for (int m = 0; m < ny; ++m) s += d(j, m) * in[i * ny + m];
        out[i * ny + j] = s;
      }
  }
}

}  // namespace

PerturbationOperator::PerturbationOperator(const Perturbation& p, GridPtr grid, double eps)
    : grid_(std::move(grid)), eps_(eps) {
  if (!grid_) throw InvalidArgument("perturbation operator needs a grid");
  if (!std::isfinite(eps)) throw InvalidArgument("epsilon must be finite");
  p.validate(grid_->domain());
  const TensorGrid& g = *grid_;
  const std::size_t n = g.size();

  auto set_zero = [&](const auto& z) {
    using T = std::decay_t<decltype(z)>;
    if constexpr (std::is_same_v<T, Multiplicative>) {
      zero_kind_ = Kind::multiplicative;
      mult_ = sample(z.v, g);
      if (z.v1) {
        auto v1 = sample(*z.v1, g);
        for (std::size_t k = 0; k < n; ++k) mult_[k] += eps * v1[k];
      }
    } else {
      zero_kind_ = Kind::rank_one;
      mult_ = sample(z.rho, g);
      auto w = g.weights();
      for (std::size_t k = 0; k < n; ++k) mult_[k] *= w[k];
      indicator_.assign(n, 0);
      auto x = g.x();
      auto y = g.y();
      for (std::size_t k = 0; k < n; ++k) indicator_[k] = z.domain.contains(x[k], y[k]) ? 1 : 0;
    }
  };

  std::visit(overloaded{
                 [&](const Multiplicative& m) {
                   kind_ = Kind::multiplicative;
                   set_zero(m);
                 },
                 [&](const RankOne& r) {
                   kind_ = Kind::rank_one;
                   set_zero(r);
                 },
                 [&](const DivergenceForm& d) {
                   kind_ = Kind::divergence;
                   if (!g.is_spectral())
                     throw InvalidArgument("divergence-form perturbation needs a single-panel Gauss grid");
                   std::visit([&](const auto& z) { set_zero(z); }, d.zero_order);
                   for (int i = 0; i < 2; ++i) {
                     for (int j = 0; j < 2; ++j) {
                       has_[2 * i + j] = !d.a[i][j].empty();
                       if (has_[2 * i + j]) a_[i][j] = sample(d.a[i][j], g);
                     }
                     has_[4 + i] = !d.b[i].empty();
                     if (has_[4 + i]) b_[i] = sample(d.b[i], g);
                   }
                   ex_ = adjoint_derivative(g.diff_x(), g.axis_x().weights);
                   ey_ = adjoint_derivative(g.diff_y(), g.axis_y().weights);
                 },
             },
             p.kind());

  if (kind_ == Kind::divergence) {
    active_.resize(n);
    for (std::size_t k = 0; k < n; ++k) active_[k] = k;
  } else if (kind_ == Kind::rank_one) {
    for (std::size_t k = 0; k < n; ++k)
      if (indicator_[k]) active_.push_back(k);
  } else {
    for (std::size_t k = 0; k < n; ++k)
      if (mult_[k] != cplx{}) active_.push_back(k);
  }
  if (kind_ == Kind::rank_one) {
    for (std::size_t k = 0; k < n; ++k)
      if (mult_[k] != cplx{}) inputs_.push_back(k);
  } else {
    inputs_ = active_;
  }
}

void PerturbationOperator::apply_zero_order(const cplx* in, cplx* out) const {
  const std::size_t n = grid_->size();
  if (zero_kind_ == Kind::multiplicative) {
    for (std::size_t k = 0; k < n; ++k) out[k] = mult_[k] * in[k];
  } else {
    cplx s{};
    for (std::size_t k = 0; k < n; ++k) s += mult_[k] * in[k];
    for (std::size_t k = 0; k < n; ++k) out[k] = indicator_[k] ? s : cplx{};
  }
}

void PerturbationOperator::apply(const cplx* in, cplx* out) const {
  apply_zero_order(in, out);
  if (kind_ != Kind::divergence) return;
  const TensorGrid& g = *grid_;
  const std::size_t n = g.size();
  const int nx = g.nx(), ny = g.ny();
  std::vector<cplx> gx(n), gy(n), f(n), t(n);
  if (has_[0] || has_[2]) along(g.diff_x(), in, gx.data(), nx, ny, 0);
  if (has_[1] || has_[3]) along(g.diff_y(), in, gy.data(), nx, ny, 1);
  for (int i = 0; i < 2; ++i) {
    if (!has_[2 * i] && !has_[2 * i + 1] && !has_[4 + i]) continue;
    for (std::size_t k = 0; k < n; ++k) {
      cplx s{};
      if (has_[2 * i]) s += a_[i][0][k] * gx[k];
      if (has_[2 * i + 1]) s += a_[i][1][k] * gy[k];
      if (has_[4 + i]) s += b_[i][k] * in[k];
      f[k] = s;
    }
    along(i == 0 ? ex_ : ey_, f.data(), t.data(), nx, ny, i);
    for (std::size_t k = 0; k < n; ++k) out[k] += t[k];
  }
}

Field PerturbationOperator::apply(const Field& g) const {
  if (g.grid() != grid_) throw InvalidArgument("field and perturbation operator live on different grids");
  Field out(grid_);
  apply(g.values().data(), out.values().data());
  return out;
}

Field PerturbationOperator::apply_to_one() const {
  return apply(Field::constant(grid_, 1.0));
}

Eigen::MatrixXcd PerturbationOperator::left_multiply(const Eigen::MatrixXcd& x) const {
  const Eigen::Index n = static_cast<Eigen::Index>(grid_->size());
  if (x.rows() != n) throw InvalidArgument("left_multiply: row count does not match the grid");
  Eigen::MatrixXcd out(n, x.cols());
  if (kind_ == Kind::multiplicative) {
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index k = 0; k < n; ++k) out(k, c) = mult_[k] * x(k, c);
    return out;
  }
  if (kind_ == Kind::rank_one) {
    Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(x.cols());
    for (Eigen::Index k = 0; k < n; ++k) r += mult_[k] * x.row(k);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (indicator_[k])
        out.row(k) = r;
      else
        out.row(k).setZero();
    }
    return out;
  }
  parallel_for(static_cast<std::size_t>(x.cols()), [&](std::size_t b, std::size_t e) {
    std::vector<cplx> in(n), res(n);
    for (std::size_t c = b; c < e; ++c) {
      for (Eigen::Index k = 0; k < n; ++k) in[k] = x(k, c);
      apply(in.data(), res.data());
      for (Eigen::Index k = 0; k < n; ++k) out(k, c) = res[k];
    }
  });
  return out;
}

Field apply_perturbation(const Perturbation& p, const Field& g, double eps) {
  PerturbationOperator op(p, g.grid(), eps);
  return op.apply(g);
}

}  // namespace shallowbound
