#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "gapflow/exact.hpp"
#include "gapflow/number_field.hpp"

namespace gapflow {

class RegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer points stored row-major: point i is data[i*d .. i*d + d).
struct LatticePoints {
  std::size_t d = 0;
  std::vector<std::int64_t> data;

  std::size_t size() const { return d == 0 ? 0 : data.size() / d; }
  const std::int64_t* point(std::size_t i) const { return data.data() + i * d; }
  /// Column-major copy as doubles (kernel input layout).
  std::vector<std::vector<double>> columns() const;
};

/// Bounded convex region R in R^d with a fixed boundary convention:
///   box        lo_j <= x_j < hi_j
///   simplex    x_j >= 0 and x . w < 1, w the field's designated generators
///   halfspaces a_k . x < b_k (strict rows) or a_k . x <= b_k
/// Dilations R(t) = t R; lattice membership is decided exactly.
class ConvexRegion {
 public:
  enum class Kind { box, simplex, halfspaces };

  struct Halfspace {
    std::vector<Rational> a;
    Rational b;
    bool strict = true;
  };

  static ConvexRegion box(std::vector<Rational> lo, std::vector<Rational> hi);
  static ConvexRegion unit_box(std::size_t d);
  static ConvexRegion simplex(std::shared_ptr<const NumberField> field);
  /// Throws RegionError if unbounded or without interior.
  static ConvexRegion halfspaces(std::size_t d, std::vector<Halfspace> rows);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const std::vector<Rational>& lo() const { return lo_; }
  const std::vector<Rational>& hi() const { return hi_; }
  const std::vector<Halfspace>& rows() const { return rows_; }

  /// Exact test m in t R.
  bool contains_lattice(const std::int64_t* m, const Rational& t) const;
  /// M(t) = t R intersected with Z^d, lexicographic order. Requires t >= 1.
  LatticePoints enumerate(const Rational& t) const;
  /// Exact count |M(t)| without materialising the points.
  std::size_t count(const Rational& t) const;

  /// Axis-aligned bounding box of R (doubles, slightly widened for non-box kinds).
  const std::vector<double>& bbox_lo() const { return bbox_lo_; }
  const std::vector<double>& bbox_hi() const { return bbox_hi_; }
  /// Exact volume when known in closed form (box, simplex); negative otherwise.
  double volume() const { return volume_; }
  double diameter() const;

  /// inside[i] = 1 iff point i shifted by `shift` lies in R (double arithmetic).
  void classify_shifted(const double* const* cols, std::size_t n, const std::vector<double>& shift,
                        std::uint8_t* inside) const;
  bool contains_double(const std::vector<double>& x) const;

 private:
  ConvexRegion() = default;
  void finish_halfspace_form();
  // Certified sign of sum_j a_j m_j - b t for rational a, b. Returns <0, 0, >0.
  int halfspace_sign(const Halfspace& h, const std::int64_t* m, const Rational& t) const;
  int simplex_sign(const std::int64_t* m, const Rational& t) const;
  template <class Fn>
  void scan(const Rational& t, Fn&& fn) const;

  Kind kind_ = Kind::box;
  std::size_t dim_ = 0;
  std::vector<Rational> lo_, hi_;
  std::vector<Halfspace> rows_;
  std::shared_ptr<const NumberField> field_;
  std::vector<double> bbox_lo_, bbox_hi_;
  double volume_ = -1;
  // Double form of the halfspace description (box and simplex too), for sampling.
  std::vector<double> hs_a_, hs_b_;
  std::vector<std::uint8_t> hs_strict_;
};

}  // namespace gapflow
