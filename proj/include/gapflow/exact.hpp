#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace gapflow {

using Integer = mpz_class;
using Rational = mpq_class;

/// Parses "p", "p/q", or a plain decimal such as "-1.25" or "3e-4" into an
/// exact rational. Never goes through binary floating point.
Rational parse_rational(std::string_view text);

/// Canonical text form: "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& q);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);

/// Exact conversion of a finite double (every double is a dyadic rational).
Rational rational_from_double(double x);

/// n / d in canonical form (gmpxx does not reduce on construction).
inline Rational ratio(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Dense row-major matrix over the rationals. Sizes here are tiny
/// (field degree), so nothing clever is done.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RationalMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Rational> column(std::size_t c) const;
  void set_column(std::size_t c, const std::vector<Rational>& v);

  RationalMatrix operator*(const RationalMatrix& rhs) const;
  std::vector<Rational> operator*(const std::vector<Rational>& v) const;
  bool operator==(const RationalMatrix& rhs) const = default;

  Rational determinant() const;
  /// Throws std::domain_error if singular.
  RationalMatrix inverse() const;
  /// Solves this * x = b. Throws std::domain_error if singular.
  std::vector<Rational> solve(const std::vector<Rational>& b) const;
  std::size_t rank() const;

  bool is_integral() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

}  // namespace gapflow
