#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "shallowbound/geometry.hpp"
#include "shallowbound/potential.hpp"

namespace shallowbound {

/// L[g] = (V + eps V1) g.
struct Multiplicative {
  PotentialSpec v;
  std::optional<PotentialSpec> v1;
};

/// L[g] = chi(Q) <rho g>.
struct RankOne {
  PotentialSpec rho;
  RectDomain domain;
};

/// L[g] = sum_ij d_i(a_ij d_j g) + sum_i d_i(a_i g) + zero-order part.
/// Empty specs stand for zero coefficients.
struct DivergenceForm {
  std::array<std::array<PotentialSpec, 2>, 2> a;
  std::array<PotentialSpec, 2> b;
  std::variant<Multiplicative, RankOne> zero_order;
};

class Perturbation {
 public:
  using Variant = std::variant<Multiplicative, RankOne, DivergenceForm>;

  Perturbation(Variant kind, std::optional<double> bound_constant = std::nullopt);

  const Variant& kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept;
  bool is_multiplicative() const noexcept { return std::holds_alternative<Multiplicative>(kind_); }
  bool is_rank_one() const noexcept { return std::holds_alternative<RankOne>(kind_); }
  bool is_divergence_form() const noexcept { return std::holds_alternative<DivergenceForm>(kind_); }

  /// Upper estimate of the operator bound; reporting only.
  double bound_constant() const noexcept { return bound_constant_; }
  bool is_real() const noexcept;

  /// Throws InvalidArgument unless every coefficient lives inside `domain`.
  void validate(const RectDomain& domain) const;

 private:
  Variant kind_;
  double bound_constant_;
};

/// L at fixed eps, sampled on one spectral grid.  Derivatives use the
/// nodal differentiation matrices; the outer divergence uses their
/// quadrature adjoint so that <L[g]> picks up nothing from the
/// divergence terms.
class PerturbationOperator {
 public:
  PerturbationOperator(const Perturbation& p, GridPtr grid, double eps);

  const GridPtr& grid() const noexcept { return grid_; }
  double epsilon() const noexcept { return eps_; }

  Field apply(const Field& g) const;
  void apply(const cplx* in, cplx* out) const;
  Field apply_to_one() const;

  /// L X for a block of column vectors.
  Eigen::MatrixXcd left_multiply(const Eigen::MatrixXcd& x) const;

  /// Nodes where L[g] can be nonzero for some g.
  const std::vector<std::size_t>& active_rows() const noexcept { return active_; }
  /// Nodes whose input value can influence L[g].
  const std::vector<std::size_t>& input_support() const noexcept { return inputs_; }

 private:
  enum class Kind { multiplicative, rank_one, divergence };
  void apply_zero_order(const cplx* in, cplx* out) const;

  GridPtr grid_;
  double eps_;
  Kind kind_;
  Kind zero_kind_;
  std::vector<cplx> mult_;       // V + eps V1, or rho * weight for rank one
  std::vector<char> indicator_;  // chi(Q) for rank one
  std::array<std::array<std::vector<cplx>, 2>, 2> a_;
  std::array<std::vector<cplx>, 2> b_;
  std::array<bool, 6> has_{};    // a11 a12 a21 a22 b1 b2
  Eigen::MatrixXd ex_, ey_;      // adjoint (outer) derivatives
  std::vector<std::size_t> active_;
  std::vector<std::size_t> inputs_;
};

Field apply_perturbation(const Perturbation& p, const Field& g, double eps);

/// Logarithmic potential (1/2pi) int ln|x - y| g(y) dy at the nodes of
/// `targets`.  The source grid must be spectral; the near-singular part is
/// handled by subtracting the local second-order Taylor polynomial of g and
/// integrating it exactly over the source rectangle.
Field apply_inverse_laplacian(const Field& g, const GridPtr& targets);
std::vector<cplx> inverse_laplacian_at(const Field& g, std::span<const double> tx, std::span<const double> ty);

/// (1/2pi) int (x - y)/|x - y|^2 g(y) dy, same treatment.
std::array<Field, 2> grad_inverse_laplacian(const Field& g, const GridPtr& targets);

/// Dense Nystrom matrix of the logarithmic potential on a spectral grid:
/// (G g)_i approximates (Delta^{-1} g)(x_i).
Eigen::MatrixXd inverse_laplacian_matrix(const GridPtr& grid);

enum class MomentProvenance { quadrature, closed_form_rank_one };

struct MomentSeries {
  std::vector<cplx> c;  // c_0 .. c_J
  MomentProvenance provenance = MomentProvenance::quadrature;
  /// Rank one only: <rho>|Q| and <rho Delta^{-1} chi>.
  cplx rank_one_scale{};
  cplx rank_one_ratio{};
  /// <|L[1]|>, the yardstick for deciding that a coefficient vanishes.
  double scale = 0.0;

  int order() const noexcept { return static_cast<int>(c.size()) - 1; }
};

/// c_j = <(L Delta^{-1})^j L[1]>, j = 0..J.  Rank-one perturbations use the
/// geometric closed form; `force_nested` computes them by nested quadrature
/// anyway.
MomentSeries moment_series(const Perturbation& p, const GridPtr& grid, double eps, int J,
                           bool force_nested = false);

struct IdentityCheck {
  std::string name;
  cplx lhs{}, rhs{};
  double relative = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|)
};

/// The three bilinear identities for zero-mean U:
///   <U D U> = -<(grad D U)^2>        (gradient integrated over the grid
///                                     enlarged `enlarge` times)
///   <(U D)^2 U> = <U (D U)^2>
///   <(U D)^3 U> = <(U D U) D (U D U)>
/// with D = Delta^{-1}.
std::array<IdentityCheck, 3> check_identities(const PotentialSpec& u, const GridPtr& grid, int enlarge = 3);

}  // namespace shallowbound
