#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shallowbound/characteristic.hpp"
#include "shallowbound/errors.hpp"
#include "shallowbound/kernels.hpp"
#include "shallowbound/predictor.hpp"
#include "shallowbound/special_functions.hpp"

namespace shallowbound {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInv2Pi = 1.0 / kTwoPi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Beyond |k| r = 4 the power series in (k r / 2)^2 is abandoned for direct
// evaluation of K0.
constexpr double kSeriesReach = 4.0;
constexpr double kSeriesFloor = 1e-18;
constexpr int kMaxSeriesTerms = 80;

constexpr double kGmresTol = 1e-13;
constexpr int kGmresMaxIter = 120;

constexpr double kContourFloor = 1e-8;
constexpr double kPhaseStep = 0.25 * std::numbers::pi;
constexpr int kContourDepth = 30;

using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// D(k r) = P_c(r^2) - ln r P_b(r^2) with ln k = -M.
struct ShallowSeries {
  bool usable = false;  // false: evaluate K0 directly
  std::vector<double> b_re, b_im, c_re, c_im;
  int terms() const { return static_cast<int>(b_re.size()); }
};

ShallowSeries shallow_series(cplx M, double rmax) {
  ShallowSeries s;
  if (std::exp(-M.real()) * rmax > kSeriesReach) return s;
  s.usable = true;
  const cplx lk2 = -M - kLn2;
  const cplx q = std::exp(2.0 * lk2);
  const double lr = std::abs(std::log(std::max(rmax, 1e-300)));
  cplx beta = 1.0;
  double rpow = 1.0;
  for (int m = 1; m <= kMaxSeriesTerms; ++m) {
    beta *= q / static_cast<double>(m * m);
    rpow *= rmax * rmax;
    const cplx shift = digamma_nat(m + 1) - lk2;
    const double bound = std::abs(beta) * rpow * (std::abs(shift) + lr + 1.0);
    if (bound < kSeriesFloor) break;
    const cplx gam = beta * shift;
    s.b_re.push_back(beta.real());
    s.b_im.push_back(beta.imag());
    s.c_re.push_back(gam.real());
    s.c_im.push_back(gam.imag());
  }
  return s;
}

cplx shallow_direct(cplx k, double r) {
  if (r == 0.0) return 0.0;
  return k0_plus_log(k * r) - kLn2 + kEulerGamma;
}

struct NodeSet {
  std::vector<double> x, y, w;
  SourceView view() const { return {x.data(), y.data(), w.data(), x.size()}; }
};

NodeSet gather(const TensorGrid& g, const std::vector<std::size_t>& idx) {
  NodeSet s;
  auto x = g.x();
  auto y = g.y();
  auto w = g.weights();
  for (std::size_t k : idx) {
    s.x.push_back(x[k]);
    s.y.push_back(y[k]);
    s.w.push_back(w[k]);
  }
  return s;
}

// S(t, j) = (1/2pi) w_j D(k |t - y_j|) for targets t and source nodes.
RowMatrixXcd shallow_matrix(cplx M, std::span<const double> tx, std::span<const double> ty, const NodeSet& src,
                            const ShallowSeries& ser) {
  const std::size_t nt = tx.size(), ns = src.x.size();
  RowMatrixXcd s(nt, ns);
  if (ser.usable && ser.terms() == 0) {
    s.setZero();
    return s;
  }
  const KernelTable& kt = kernels();
  const cplx k = std::exp(-M);
  parallel_for(nt, [&](std::size_t b, std::size_t e) {
    std::vector<double> re(ns), im(ns);
    for (std::size_t i = b; i < e; ++i) {
      if (ser.usable) {
        kt.shallow_row(tx[i], ty[i], src.view(), ser.b_re.data(), ser.b_im.data(), ser.c_re.data(),
                       ser.c_im.data(), ser.terms(), re.data(), im.data());
        for (std::size_t j = 0; j < ns; ++j) s(i, j) = kInv2Pi * cplx(re[j], im[j]);
      } else {
        for (std::size_t j = 0; j < ns; ++j)
          s(i, j) = kInv2Pi * src.w[j] * shallow_direct(k, std::hypot(tx[i] - src.x[j], ty[i] - src.y[j]));
      }
    }
  });
  return s;
}

// Right-preconditioned GMRES on a matrix-free operator, zero start.
template <class Op>
bool gmres(const Op& apply, const Eigen::VectorXcd& b, Eigen::VectorXcd& y, double tol, int max_iter) {
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  y = Eigen::VectorXcd::Zero(n);
  if (bnorm == 0.0) return true;
  const int m = static_cast<int>(std::min<Eigen::Index>(max_iter, n));
  Eigen::MatrixXcd v(n, m + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
  std::vector<cplx> cs(m), sn(m);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
  v.col(0) = b / bnorm;
  g(0) = bnorm;
  int used = 0;
  bool ok = false;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = apply(v.col(j));
    for (int i = 0; i <= j; ++i) {
      h(i, j) = v.col(i).dot(w);
      w -= h(i, j) * v.col(i);
    }
    h(j + 1, j) = w.norm();
    if (std::abs(h(j + 1, j)) > 0.0) v.col(j + 1) = w / h(j + 1, j);
    for (int i = 0; i < j; ++i) {
      const cplx t = std::conj(cs[i]) * h(i, j) + std::conj(sn[i]) * h(i + 1, j);
      h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    const double den = std::hypot(std::abs(h(j, j)), std::abs(h(j + 1, j)));
    if (den == 0.0) break;
    cs[j] = h(j, j) / den;
    sn[j] = h(j + 1, j) / den;
    h(j, j) = den;
    h(j + 1, j) = 0.0;
    g(j + 1) = -sn[j] * g(j);
    g(j) = std::conj(cs[j]) * g(j);
    used = j + 1;
    if (std::abs(g(j + 1)) <= tol * bnorm) {
      ok = true;
      break;
    }
    if (std::abs(h(j, j)) == 0.0) break;
  }
  if (used == 0) return false;
  Eigen::VectorXcd z = h.topLeftCorner(used, used).triangularView<Eigen::Upper>().solve(g.head(used));
  y = v.leftCols(used) * z;
  return ok;
}

// I + eps [L G]_aa, factored once.  Rank-one L makes the block
// I + eps 1 v^T, which is solved directly.
class BaseFactor {
 public:
  void factor(Eigen::MatrixXcd a) {
    a_ = std::move(a);
    lu_.compute(a_);
    rcond_ = lu_.rcond();
  }
  void factor_rank_one(Eigen::VectorXcd v, double eps) {
    rank_one_ = true;
    v_ = eps * std::move(v);
    denom_ = 1.0 + v_.sum();
    const double n = static_cast<double>(v_.size());
    rcond_ = std::abs(denom_) / ((1.0 + std::sqrt(n) * v_.norm()) * (1.0 + std::sqrt(n) * v_.norm()));
  }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& y) const {
    if (!rank_one_) return lu_.solve(y);
    const cplx t = v_.transpose() * y;
    return y - Eigen::VectorXcd::Constant(y.size(), t / denom_);
  }
  double rcond() const { return rcond_; }
  Eigen::MatrixXcd matrix() const {
    if (!rank_one_) return a_;
    Eigen::MatrixXcd a = Eigen::VectorXcd::Ones(v_.size()) * v_.transpose();
    a.diagonal().array() += 1.0;
    return a;
  }

 private:
  bool rank_one_ = false;
  Eigen::MatrixXcd a_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  Eigen::VectorXcd v_;
  cplx denom_{1.0};
  double rcond_ = 1.0;
};

bool inside_region(cplx M, double max_k) { return M.real() >= -std::log(max_k) && std::abs(M.imag()) < kHalfPi; }

}  // namespace

const char* to_string(SolveStatus s) noexcept {
  return s == SolveStatus::converged ? "converged" : "absent_by_solver";
}

struct CharacteristicSystem::Impl {
  Impl(const Perturbation& p, const GridPtr& grid, double eps) : op(p, grid, eps) {}

  PerturbationOperator op;
  Eigen::MatrixXd g;
  std::vector<std::size_t> act, in;
  NodeSet act_nodes;
  std::vector<double> in_x, in_y;
  BaseFactor lu;
  Eigen::VectorXcd l1, x0;
  double rmax = 0.0;
};

CharacteristicSystem::CharacteristicSystem(const Perturbation& p, GridPtr grid, double eps, const SolverOptions& opt)
    : p_(p), grid_(std::move(grid)), eps_(eps), opt_(opt) {
  if (!grid_) throw InvalidArgument("characteristic system needs a grid");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be finite and non-negative");
  if (!(opt.max_k > 0.0) || !(opt.tolerance > 0.0) || opt.max_iterations < 1 || !(opt.condition_limit > 1.0))
    throw InvalidArgument("invalid solver options");
  impl_ = std::make_unique<Impl>(p_, grid_, eps_);
  Impl& s = *impl_;
  const TensorGrid& gr = *grid_;
  s.g = inverse_laplacian_matrix(grid_);
  s.act = s.op.active_rows();
  s.in = s.op.input_support();
  s.act_nodes = gather(gr, s.act);
  for (std::size_t k : s.in) {
    s.in_x.push_back(gr.x()[k]);
    s.in_y.push_back(gr.y()[k]);
  }
  s.rmax = gr.domain().diameter();
  const Eigen::Index na = static_cast<Eigen::Index>(s.act.size());
  if (na == 0) return;

  const Eigen::Index n = static_cast<Eigen::Index>(gr.size());
  {
    Eigen::MatrixXcd gc(n, na);
    for (Eigen::Index j = 0; j < na; ++j) gc.col(j) = s.g.col(static_cast<Eigen::Index>(s.act[j])).cast<cplx>();
    Eigen::MatrixXcd lg = s.op.left_multiply(gc);
    if (p_.is_rank_one()) {
      s.lu.factor_rank_one(lg.row(static_cast<Eigen::Index>(s.act[0])).transpose(), eps_);
    } else {
      Eigen::MatrixXcd a0(na, na);
      for (Eigen::Index i = 0; i < na; ++i) a0.row(i) = eps_ * lg.row(static_cast<Eigen::Index>(s.act[i]));
      a0.diagonal().array() += 1.0;
      s.lu.factor(std::move(a0));
    }
  }
  const double rc = s.lu.rcond();
  if (!(rc * opt_.condition_limit >= 1.0))
    throw NearSingularOperator("I + eps T0 is too badly conditioned as k -> 0 (rcond " + std::to_string(rc) + ")",
                               cplx{});
  Field one = s.op.apply_to_one();
  s.l1.resize(na);
  for (Eigen::Index i = 0; i < na; ++i) s.l1(i) = one[s.act[i]];
  s.x0 = s.lu.solve(s.l1);
}

CharacteristicSystem::~CharacteristicSystem() = default;

cplx CharacteristicSystem::mean_of(const Eigen::VectorXcd& xa) const {
  cplx m{};
  for (Eigen::Index i = 0; i < xa.size(); ++i) m += impl_->act_nodes.w[i] * xa(i);
  return m;
}

Eigen::VectorXcd CharacteristicSystem::solve(cplx M) const {
  const Impl& s = *impl_;
  if (s.act.empty()) return {};
  if (!std::isfinite(M.real()) || !std::isfinite(M.imag())) throw InvalidArgument("non-finite spectral parameter");
  ShallowSeries ser = shallow_series(M, s.rmax);
  if (ser.usable && ser.terms() == 0) return s.x0;
  RowMatrixXcd sm = shallow_matrix(M, s.in_x, s.in_y, s.act_nodes, ser);

  const std::size_t n = grid_->size();
  const Eigen::Index na = static_cast<Eigen::Index>(s.act.size());
  auto apply = [&](const Eigen::VectorXcd& y) {
    Eigen::VectorXcd u = s.lu.solve(y);
    Eigen::VectorXcd su = sm * u;
    std::vector<cplx> full(n), out(n);
    for (std::size_t r = 0; r < s.in.size(); ++r) full[s.in[r]] = su(static_cast<Eigen::Index>(r));
    s.op.apply(full.data(), out.data());
    Eigen::VectorXcd res = y;
    for (Eigen::Index a = 0; a < na; ++a) res(a) -= eps_ * out[s.act[a]];
    return res;
  };
  Eigen::VectorXcd y;
  if (gmres(apply, s.l1, y, kGmresTol, kGmresMaxIter)) return s.lu.solve(y);

  // Dense fallback.
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), na);
  for (std::size_t r = 0; r < s.in.size(); ++r) full.row(static_cast<Eigen::Index>(s.in[r])) = sm.row(r);
  Eigen::MatrixXcd ls = s.op.left_multiply(full);
  Eigen::MatrixXcd a = s.lu.matrix();
  for (Eigen::Index i = 0; i < na; ++i) a.row(i) -= eps_ * ls.row(static_cast<Eigen::Index>(s.act[i]));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  if (!(lu.rcond() * opt_.condition_limit >= 1.0))
    throw NearSingularOperator("I + eps T0(k) is near singular", std::exp(-M));
  return lu.solve(s.l1);
}

Field CharacteristicSystem::density(cplx M) const {
  Field f(grid_);
  Eigen::VectorXcd x = solve(M);
  for (Eigen::Index i = 0; i < x.size(); ++i) f[impl_->act[i]] = x(i);
  return f;
}

cplx CharacteristicSystem::char_function_m(cplx M) const {
  if (eps_ == 0.0 || impl_->act.empty()) return 1.0;
  const cplx mean = mean_of(solve(M));
  return 1.0 + eps_ * kInv2Pi * mean * (-M + kEulerGamma - kLn2);
}

cplx CharacteristicSystem::char_function(cplx k) const {
  if (k == cplx{} || (k.imag() == 0.0 && k.real() < 0.0))
    throw DomainError("characteristic function is defined off the cut (-inf, 0]");
  return char_function_m(-std::log(k));
}

CharEqSolution CharacteristicSystem::find_root(cplx m_init) const {
  if (!std::isfinite(m_init.real()) || !std::isfinite(m_init.imag()))
    throw InvalidArgument("initial guess must be finite");
  if (eps_ == 0.0 || impl_->act.empty()) throw NoRootFound("F is identically one: eps = 0 or L = 0");
  const double lo = -std::log(opt_.max_k);
  CharEqSolution sol;
  cplx M = m_init;
  if (!inside_region(M, opt_.max_k)) {
    M = cplx(std::max(M.real(), lo), std::clamp(M.imag(), -kHalfPi + 0.01, kHalfPi - 0.01));
    sol.note = "initial guess moved into the search region";
  }
  auto absent = [&](cplx m, int it, const char* why) {
    sol.status = SolveStatus::absent_by_solver;
    sol.m = m;
    sol.k = sol.lambda = cplx(std::nan(""), std::nan(""));
    sol.iterations = it;
    sol.note += (sol.note.empty() ? "" : "; ") + std::string(why);
    return sol;
  };
  auto next = [&](cplx m) {
    const cplx mean = mean_of(solve(m));
    if (mean == cplx{}) throw NoRootFound("<B L1> vanished during the iteration");
    return kTwoPi / (eps_ * mean) + kEulerGamma - kLn2;
  };
  auto close = [&](cplx a, cplx b) { return std::abs(a - b) <= opt_.tolerance * (1.0 + std::abs(b)); };

  bool done = false;
  int it = 0;
  cplx prev = M;
  for (; it < opt_.max_iterations && !done; ++it) {
    const cplx mn = next(M);
    if (!inside_region(mn, opt_.max_k))
      return absent(mn, it + 1, mn.real() < lo ? "iterate left |k| <= max_k" : "iterate reached Re k <= 0");
    done = close(M, mn);
    prev = M;
    M = mn;
  }
  if (!done) {
    cplx m0 = prev, m1 = M;
    cplx f0 = char_function_m(m0), f1 = char_function_m(m1);
    for (int j = 0; j < opt_.max_iterations && !done; ++j, ++it) {
      if (f1 == f0) break;
      const cplx m2 = m1 - f1 * (m1 - m0) / (f1 - f0);
      if (!inside_region(m2, opt_.max_k))
        return absent(m2, it + 1, m2.real() < lo ? "secant left |k| <= max_k" : "secant reached Re k <= 0");
      done = close(m1, m2);
      m0 = m1;
      f0 = f1;
      m1 = m2;
      f1 = char_function_m(m1);
    }
    M = m1;
    if (!done) throw NoRootFound("characteristic equation did not converge after " + std::to_string(it) + " steps");
  }
  sol.status = SolveStatus::converged;
  sol.m = M;
  sol.k = std::exp(-M);
  sol.lambda = -(sol.k * sol.k);
  sol.iterations = it;
  sol.density = density(M);
  const cplx mean = integrate(*sol.density);
  sol.f_abs = std::abs(1.0 + eps_ * kInv2Pi * mean * (-M + kEulerGamma - kLn2));
  return sol;
}

int CharacteristicSystem::count_roots(const Sector& sec) const {
  if (!(sec.r_min > 0.0 && sec.r_min < sec.r_max) || !(sec.half_angle > 0.0 && sec.half_angle < kHalfPi))
    throw InvalidArgument("invalid counting sector");
  const double a = -std::log(sec.r_max), b = -std::log(sec.r_min), th = sec.half_angle;
  // Positively oriented rectangle in M = -ln k; the map is conformal, so
  // the winding number counts zeros in the sector.
  const cplx corner[4] = {{a, -th}, {b, -th}, {b, th}, {a, th}};
  auto eval = [&](cplx M) {
    const cplx f = char_function_m(M);
    if (!(std::abs(f) >= kContourFloor))
      throw InconclusiveContour("|F| fell below the contour floor at |k| = " + std::to_string(std::exp(-M.real())));
    return f;
  };
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx p = corner[e], q = corner[(e + 1) % 4];
    auto at = [&](double t) { return p + t * (q - p); };
    const int n0 = std::max(8, static_cast<int>(std::ceil(std::abs(q - p) * 2.0)));
    auto seg = [&](auto&& self, double t0, cplx f0, double t1, cplx f1, int depth) -> double {
      const double d = std::arg(f1 / f0);
      if (std::abs(d) < kPhaseStep) return d;
      if (depth >= kContourDepth) throw InconclusiveContour("argument of F does not resolve on the contour");
      const double tm = 0.5 * (t0 + t1);
      const cplx fm = eval(at(tm));
      return self(self, t0, f0, tm, fm, depth + 1) + self(self, tm, fm, t1, f1, depth + 1);
    };
    double t0 = 0.0;
    cplx f0 = eval(at(0.0));
    for (int i = 1; i <= n0; ++i) {
      const double t1 = static_cast<double>(i) / n0;
      const cplx f1 = eval(at(t1));
      total += seg(seg, t0, f0, t1, f1, 0);
      t0 = t1;
      f0 = f1;
    }
  }
  const double w = total / kTwoPi;
  const double r = std::round(w);
  if (std::abs(w - r) > 1e-6) throw InconclusiveContour("winding number is not an integer");
  return static_cast<int>(r);
}

std::vector<cplx> CharacteristicSystem::eigenfunction_at(const CharEqSolution& sol, std::span<const double> xs,
                                                         std::span<const double> ys) const {
  if (sol.status != SolveStatus::converged || !sol.density)
    throw InvalidArgument("eigenfunction needs a converged root");
  if (xs.size() != ys.size()) throw InvalidArgument("target coordinate arrays differ in length");
  const Impl& s = *impl_;
  const Field& x = *sol.density;
  std::vector<cplx> phi = inverse_laplacian_at(x, xs, ys);
  const cplx shift = (-sol.m + kEulerGamma - kLn2) * integrate(x) * kInv2Pi;
  const RectDomain& q = grid_->domain();
  double rmax = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::max(std::abs(xs[i] - q.x0()), std::abs(xs[i] - q.x1()));
    const double dy = std::max(std::abs(ys[i] - q.y0()), std::abs(ys[i] - q.y1()));
    rmax = std::max(rmax, std::hypot(dx, dy));
  }
  Eigen::VectorXcd xa(static_cast<Eigen::Index>(s.act.size()));
  for (std::size_t j = 0; j < s.act.size(); ++j) xa(static_cast<Eigen::Index>(j)) = x[s.act[j]];
  RowMatrixXcd sm = shallow_matrix(sol.m, xs, ys, s.act_nodes, shallow_series(sol.m, rmax));
  Eigen::VectorXcd d = sm * xa;
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += shift - d(static_cast<Eigen::Index>(i));
  return phi;
}

EigenResult CharacteristicSystem::eigenfunction(const CharEqSolution& sol, int lattice_n) const {
  if (lattice_n < 8) throw InvalidArgument("evaluation lattice needs at least 8 points per side");
  GridPtr lat = build_lattice(grid_->domain(), lattice_n);
  const TensorGrid& L = *lat;
  std::vector<cplx> phi = eigenfunction_at(sol, L.x(), L.y());
  const int nx = L.nx(), ny = L.ny();
  const double hx = L.axis_x().nodes[1] - L.axis_x().nodes[0];
  const double hy = L.axis_y().nodes[1] - L.axis_y().nodes[0];
  auto id = [&](int i, int j) { return L.index(i, j); };
  auto lx = L.x();
  auto ly = L.y();

  auto zero_order = [&](const auto& z, std::vector<cplx>& out) {
    using T = std::decay_t<decltype(z)>;
    if constexpr (std::is_same_v<T, Multiplicative>) {
      for (std::size_t k = 0; k < L.size(); ++k) {
        cplx v = z.v(lx[k], ly[k]);
        if (z.v1) v += eps_ * (*z.v1)(lx[k], ly[k]);
        out[k] += v * phi[k];
      }
    } else {
      const TensorGrid& g = *grid_;
      std::vector<cplx> pg = eigenfunction_at(sol, g.x(), g.y());
      cplx m{};
      for (std::size_t k = 0; k < g.size(); ++k) m += g.weights()[k] * z.rho(g.x()[k], g.y()[k]) * pg[k];
      for (std::size_t k = 0; k < L.size(); ++k)
        if (z.domain.contains(lx[k], ly[k])) out[k] += m;
    }
  };

  std::vector<cplx> lphi(L.size());
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, DivergenceForm>) {
          std::visit([&](const auto& z) { zero_order(z, lphi); }, kind.zero_order);
          std::vector<cplx> gx(L.size()), gy(L.size());
          for (int i = 1; i + 1 < nx; ++i)
            for (int j = 1; j + 1 < ny; ++j) {
              gx[id(i, j)] = (phi[id(i + 1, j)] - phi[id(i - 1, j)]) / (2.0 * hx);
              gy[id(i, j)] = (phi[id(i, j + 1)] - phi[id(i, j - 1)]) / (2.0 * hy);
            }
          std::array<std::vector<cplx>, 2> f{std::vector<cplx>(L.size()), std::vector<cplx>(L.size())};
          for (int c = 0; c < 2; ++c)
            for (std::size_t k = 0; k < L.size(); ++k) {
              cplx v{};
              if (!kind.a[c][0].empty()) v += kind.a[c][0](lx[k], ly[k]) * gx[k];
              if (!kind.a[c][1].empty()) v += kind.a[c][1](lx[k], ly[k]) * gy[k];
              if (!kind.b[c].empty()) v += kind.b[c](lx[k], ly[k]) * phi[k];
              f[c][k] = v;
            }
          for (int i = 2; i + 2 < nx; ++i)
            for (int j = 2; j + 2 < ny; ++j)
              lphi[id(i, j)] += (f[0][id(i + 1, j)] - f[0][id(i - 1, j)]) / (2.0 * hx) +
                                (f[1][id(i, j + 1)] - f[1][id(i, j - 1)]) / (2.0 * hy);
        } else {
          zero_order(kind, lphi);
        }
      },
      p_.kind());

  double num = 0.0, den = 0.0;
  for (int i = 2; i + 2 < nx; ++i)
    for (int j = 2; j + 2 < ny; ++j) {
      const std::size_t k = id(i, j);
      const cplx lap = (phi[id(i + 1, j)] - 2.0 * phi[k] + phi[id(i - 1, j)]) / (hx * hx) +
                       (phi[id(i, j + 1)] - 2.0 * phi[k] + phi[id(i, j - 1)]) / (hy * hy);
      const cplx r = -lap - eps_ * lphi[k] - sol.lambda * phi[k];
      num += std::norm(r);
      den += std::norm(phi[k]);
    }
  if (den == 0.0) throw NearSingularOperator("eigenfunction vanishes on the evaluation lattice", sol.k);

  std::size_t top = 0;
  for (std::size_t k = 1; k < phi.size(); ++k)
    if (std::abs(phi[k]) > std::abs(phi[top])) top = k;
  const cplx scale = phi[top];
  for (cplx& v : phi) v /= scale;
  return {Field(lat, std::move(phi)), std::sqrt(num / den)};
}

DiscretizedOperator CharacteristicSystem::t0(cplx k) const {
  if (k == cplx{} || (k.imag() == 0.0 && k.real() < 0.0)) throw DomainError("T0(k) needs k off (-inf, 0]");
  const Impl& s = *impl_;
  const TensorGrid& g = *grid_;
  std::vector<std::size_t> all(g.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  NodeSet nodes = gather(g, all);
  RowMatrixXcd sm = shallow_matrix(-std::log(k), g.x(), g.y(), nodes, shallow_series(-std::log(k), s.rmax));
  Eigen::MatrixXcd m = s.g.cast<cplx>() - Eigen::MatrixXcd(sm);
  return {grid_, k, eps_, s.op.left_multiply(m)};
}

cplx char_function(const Perturbation& p, const GridPtr& grid, double eps, cplx k) {
  return CharacteristicSystem(p, grid, eps).char_function(k);
}

CharEqSolution find_root(const Perturbation& p, const GridPtr& grid, double eps, std::optional<cplx> m_init,
                         const SolverOptions& opt) {
  CharacteristicSystem sys(p, grid, eps, opt);
  if (!m_init) {
    MomentSeries m = moment_series(p, grid, eps, 3);
    m_init = m_tilde(m, eps);
  }
  return sys.find_root(*m_init);
}

int count_roots(const Perturbation& p, const GridPtr& grid, double eps, const Sector& s) {
  return CharacteristicSystem(p, grid, eps).count_roots(s);
}

DiscretizedOperator assemble_t0(const Perturbation& p, const GridPtr& grid, cplx k, double eps) {
  return CharacteristicSystem(p, grid, eps).t0(k);
}

}  // namespace shallowbound
