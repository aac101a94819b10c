#pragma once

#include <complex>
#include <string>

#include <boost/multiprecision/mpfr.hpp>

#include "gapflow/exact.hpp"

namespace gapflow {

// Fixed-precision MPFR backend: precision is a property of the type, so no
// shared default-precision state is touched and values can cross threads.
using BigFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<100>,
                                               boost::multiprecision::et_off>;

/// Binary precision of BigFloat (100 decimal digits ~ 336 bits).
inline constexpr unsigned kBigFloatBits = 336;

/// Largest certification target the backend can honour with headroom for
/// rounding in the error bounds themselves.
inline constexpr unsigned kMaxCertifiedBits = 300;

BigFloat to_bigfloat(const Rational& q);
BigFloat to_bigfloat(const Integer& z);
inline double to_double(const BigFloat& x) { return x.convert_to<double>(); }

/// 2^-bits as a BigFloat.
BigFloat pow2_neg(unsigned bits);

/// Decimal rendering with a fixed number of digits after the point.
std::string format_fixed(const BigFloat& x, int decimals);

struct BigComplex {
  BigFloat re;
  BigFloat im;

  BigComplex() = default;
  BigComplex(BigFloat r, BigFloat i = 0) : re(std::move(r)), im(std::move(i)) {}

  BigComplex operator+(const BigComplex& o) const { return {re + o.re, im + o.im}; }
  BigComplex operator-(const BigComplex& o) const { return {re - o.re, im - o.im}; }
  BigComplex operator*(const BigComplex& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  BigComplex operator/(const BigComplex& o) const;
  BigComplex conj() const { return {re, -im}; }
  BigFloat abs() const;
  std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }
};

/// Logarithm with the branch cut moved off the negative real axis: negative
/// reals map to log|x| + i*pi, everything else to the principal value.
BigComplex branch_log(const BigComplex& z);

BigFloat big_pi();

}  // namespace gapflow
