#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapflow/bigfloat.hpp"
#include "gapflow/exact.hpp"
#include "gapflow/polynomial.hpp"

namespace gapflow {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact coordinates (n_0, n_1, ..., n_d) of n_0 + n_1 w_1 + ... + n_d w_d.
class FieldElement {
 public:
  FieldElement() = default;
  explicit FieldElement(std::vector<Rational> coords) : coords_(std::move(coords)) {}
  static FieldElement from_integers(std::span<const std::int64_t> coords);
  static FieldElement zero(std::size_t n) { return FieldElement(std::vector<Rational>(n)); }
  static FieldElement unit_vector(std::size_t n, std::size_t i);

  std::size_t size() const { return coords_.size(); }
  const Rational& operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<Rational>& coords() const { return coords_; }
  bool is_zero() const;
  bool is_rational() const;  // only the constant coordinate may be non-zero
  bool is_integral() const;  // all coordinates integers

  /// Truncated expansion (n_1, ..., n_d).
  std::vector<Rational> truncated() const { return {coords_.begin() + 1, coords_.end()}; }

  FieldElement operator+(const FieldElement& o) const;
  FieldElement operator-(const FieldElement& o) const;
  FieldElement operator-() const;
  FieldElement operator*(const Rational& c) const;
  bool operator==(const FieldElement& o) const = default;
  /// Lexicographic order on coordinates; only for use as a map key.
  bool lex_less(const FieldElement& o) const;

  /// "(n0, n1, ..., nd)" with exact rationals.
  std::string to_string() const;

 private:
  std::vector<Rational> coords_;
};

struct FieldElementLexLess {
  bool operator()(const FieldElement& a, const FieldElement& b) const { return a.lex_less(b); }
};

/// Certified disk { z : |z - center| <= radius } (an interval when im == 0
/// for a real embedding).
struct Enclosure {
  BigFloat re;
  BigFloat im;
  BigFloat radius;
  bool real = true;

  bool contains(const BigFloat& x) const;
  bool excludes_zero() const;
  std::complex<double> approx() const { return {to_double(re), to_double(im)}; }
};

struct FieldSpec {
  /// Integer coefficients of the primitive element's polynomial, lowest
  /// degree first.
  std::vector<Integer> minpoly;
  /// Rational coefficients (lowest degree first) expressing each w_j as a
  /// polynomial in the primitive element.
  std::vector<std::vector<Rational>> omega_defs;
  /// Decimal approximations of the designated real values of w_j. Empty
  /// means "use the smallest real root".
  std::vector<Rational> omega_approx;
  Rational hint_tolerance = Rational(1, 1000);
  unsigned root_bits = 80;

  bool operator==(const FieldSpec&) const = default;
};

/// Degree-(d+1) number field with basis 1, w_1, ..., w_d.
///
/// Embedding indices run over 0 .. r1 + r2 - 1: index 0 is the designated
/// real embedding sigma_1, indices 1 .. r1 - 1 are the remaining real
/// embeddings in increasing order of the root, and r1 .. r1 + r2 - 1 are one
/// member (positive imaginary part) of each complex-conjugate pair.
/// Immutable after construction.
class NumberField {
 public:
  static NumberField make(const FieldSpec& spec);

  const FieldSpec& spec() const { return spec_; }
  std::size_t degree() const { return degree_; }
  std::size_t d() const { return degree_ - 1; }
  std::size_t r1() const { return r1_; }
  std::size_t r2() const { return r2_; }
  std::size_t num_embeddings() const { return r1_ + r2_; }
  std::size_t unit_rank() const { return r1_ + r2_ - 1; }
  const Polynomial& minpoly() const { return minpoly_; }

  FieldElement zero() const { return FieldElement::zero(degree_); }
  FieldElement one() const { return FieldElement::unit_vector(degree_, 0); }
  FieldElement basis(std::size_t i) const { return FieldElement::unit_vector(degree_, i); }
  FieldElement from_rational(const Rational& q) const;

  FieldElement mul(const FieldElement& a, const FieldElement& b) const;
  /// Throws FieldError on zero.
  FieldElement inv(const FieldElement& a) const;
  FieldElement div(const FieldElement& a, const FieldElement& b) const { return mul(a, inv(b)); }
  FieldElement pow(const FieldElement& a, long exponent) const;
  /// Column j is n(a * basis_j).
  RationalMatrix mult_matrix(const FieldElement& a) const;
  Rational norm(const FieldElement& a) const { return mult_matrix(a).determinant(); }
  /// Structure constants: coordinates of basis_i * basis_j.
  const FieldElement& product_of_basis(std::size_t i, std::size_t j) const { return mult_tensor_[i * degree_ + j]; }

  /// Certified enclosure of sigma_i(a) with radius well below 2^-bits (for
  /// moderate coefficient sizes). bits must lie in [1, kMaxCertifiedBits].
  Enclosure embed(const FieldElement& a, std::size_t i, unsigned bits = 80) const;
  /// All d+1 complex embeddings: real ones, then each pair as (sigma, conj sigma).
  std::vector<BigComplex> all_embeddings(const FieldElement& a, unsigned bits = 200) const;
  /// Real embeddings then (Re, Im) of each chosen complex embedding.
  std::vector<double> minkowski(const FieldElement& a) const;
  /// (log|sigma_1(u)|, ..., log|sigma_{r1+r2}(u)|). Throws FieldError on zero.
  std::vector<BigFloat> log_embedding(const FieldElement& u, unsigned bits = 200) const;

  /// Exact sign of sigma_1(a).
  int sign_of(const FieldElement& a) const;
  int compare(const FieldElement& a, const FieldElement& b) const { return sign_of(a - b); }
  /// Certified floor of sigma_1(a).
  Integer floor_sigma1(const FieldElement& a) const;
  double sigma1_double(const FieldElement& a) const;
  /// Designated real values sigma_1(w_j), rounded to nearest double.
  const std::vector<double>& omega_double() const { return omega_double_; }

  /// Covolume of the Minkowski image of Z^{d+1} (coordinates w.r.t. the basis).
  double lattice_covolume() const;

 private:
  NumberField() = default;

  struct RealRoot {
    RootInterval coarse;  // width <= 2^-root_bits
    RootInterval fine;    // width <= 2^-kMaxCertifiedBits
  };
  struct ComplexRoot {
    BigComplex center;
    BigFloat radius;
  };

  std::vector<Rational> power_coords(const FieldElement& a) const;
  Enclosure eval_real(const std::vector<Rational>& p, const RootInterval& iv) const;
  Enclosure eval_complex(const std::vector<Rational>& p, const ComplexRoot& root) const;
  int exact_sign_sigma1(const std::vector<Rational>& p) const;

  FieldSpec spec_;
  Polynomial minpoly_;
  std::size_t degree_ = 0;
  std::size_t r1_ = 0;
  std::size_t r2_ = 0;
  RationalMatrix to_power_;    // basis coords -> power-basis coords
  RationalMatrix from_power_;  // inverse
  std::vector<FieldElement> mult_tensor_;
  std::vector<RealRoot> real_roots_;       // embedding order
  std::vector<ComplexRoot> complex_roots_;  // upper half plane
  std::vector<double> omega_double_;
};

}  // namespace gapflow
