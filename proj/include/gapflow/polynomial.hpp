#pragma once

#include <utility>
#include <vector>

#include "gapflow/bigfloat.hpp"
#include "gapflow/exact.hpp"

namespace gapflow {

/// Univariate polynomial over Q, coefficients lowest degree first.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs);

  static Polynomial monomial(const Rational& c, std::size_t power);

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  Rational coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }
  const Rational& leading() const { return coeffs_.back(); }

  Rational eval(const Rational& x) const;
  BigFloat eval(const BigFloat& x) const;
  BigComplex eval(const BigComplex& x) const;

  Polynomial derivative() const;
  Polynomial monic() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(const Rational& c) const;
  bool operator==(const Polynomial& o) const { return coeffs_ == o.coeffs_; }

  /// Euclidean division: returns (quotient, remainder).
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& divisor) const;
  Polynomial mod(const Polynomial& divisor) const { return divmod(divisor).second; }

  /// Monic gcd.
  static Polynomial gcd(Polynomial a, Polynomial b);

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// Half-open rational interval (lo, hi] holding exactly one real root.
struct RootInterval {
  Rational lo;
  Rational hi;
};

/// Sturm chain f, f', -rem(f, f'), ... for counting real roots.
class SturmSequence {
 public:
  explicit SturmSequence(const Polynomial& f);
  /// Number of sign changes at x (zeros skipped).
  int variations(const Rational& x) const;
  /// Distinct real roots in (a, b].
  int count_roots(const Rational& a, const Rational& b) const;

 private:
  std::vector<Polynomial> chain_;
};

/// Isolates every real root of a squarefree polynomial, ascending, each
/// interval refined to width <= 2^-bits.
std::vector<RootInterval> isolate_real_roots(const Polynomial& f, unsigned bits);

/// Bisects an isolating interval of a squarefree polynomial until its width is
/// at most 2^-bits. Endpoints never become roots unless the root is rational.
RootInterval refine_root(const Polynomial& f, RootInterval iv, unsigned bits);

/// Cauchy bound: every complex root has modulus < bound.
Rational cauchy_root_bound(const Polynomial& f);

}  // namespace gapflow
