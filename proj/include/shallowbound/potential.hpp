#pragma once

#include <complex>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shallowbound/geometry.hpp"

namespace shallowbound {

enum class Family { cosine_bump, polynomial_bump, disk_indicator, tabulated };

/// What a term contributes: the profile itself, its Laplacian, or the
/// profile times (x - cx) / (y - cy).
enum class TermOp { value, laplacian, x_times, y_times };

const char* to_string(Family f);
const char* to_string(TermOp op);

/// Complex samples on a regular lattice, read from CSV with header x,y,re,im.
class SampleTable {
 public:
  SampleTable(std::vector<double> xs, std::vector<double> ys, std::vector<cplx> values);
  static SampleTable read_csv(std::istream& in);
  static SampleTable read_csv_file(const std::string& path);

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }
  /// values index i*ny + j, i along x.
  const std::vector<cplx>& values() const noexcept { return values_; }

  /// Bilinear interpolation; zero outside the lattice.
  cplx at(double x, double y) const;
  RectDomain bounds() const;

 private:
  std::vector<double> xs_, ys_;
  std::vector<cplx> values_;
};

struct PotentialTerm {
  Family family = Family::polynomial_bump;
  cplx amplitude{1.0, 0.0};
  double cx = 0.0, cy = 0.0;
  double radius = 1.0;
  double exponent = 2.0;
  TermOp op = TermOp::value;
  std::shared_ptr<const SampleTable> table;

  cplx value(double x, double y) const;
  RectDomain support() const;
  bool is_real() const noexcept;
};

/// Sum of family terms; the empty sum is the zero function.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<PotentialTerm> terms);

  static PotentialSpec polynomial_bump(cplx amplitude, double cx, double cy, double radius, double p);
  static PotentialSpec cosine_bump(cplx amplitude, double cx, double cy, double radius);
  static PotentialSpec disk(cplx amplitude, double cx, double cy, double radius);
  static PotentialSpec tabulated(std::shared_ptr<const SampleTable> table, cplx amplitude = 1.0);

  const std::vector<PotentialTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  cplx operator()(double x, double y) const;

  /// Every term real-valued.
  bool is_real() const noexcept;

  /// Function of the distance to a common center only.
  bool is_radial() const noexcept;
  std::pair<double, double> center() const;
  /// Radius outside which a radial spec vanishes.
  double support_radius() const;
  /// Profile along the ray from the center (radial specs only).
  cplx radial(double r) const;

  /// Bounding box of all term supports, if any term exists.
  std::optional<RectDomain> support() const;
  /// Throws InvalidArgument if some term reaches outside `domain`.
  void validate(const RectDomain& domain) const;

  /// Largest |value| over a probe of the support.
  double sup_norm() const;

  PotentialSpec operator+(const PotentialSpec& other) const;
  PotentialSpec scaled(cplx factor) const;
  /// Same profiles with every term's op replaced by `op` (value terms only).
  PotentialSpec with_op(TermOp op) const;

 private:
  std::vector<PotentialTerm> terms_;
};

Field sample_potential(const PotentialSpec& spec, const GridPtr& grid);

}  // namespace shallowbound
