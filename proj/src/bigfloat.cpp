#include "gapflow/bigfloat.hpp"

#include <sstream>

namespace gapflow {

BigFloat to_bigfloat(const Rational& q) {
  BigFloat r;
  mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return r;
}

BigFloat to_bigfloat(const Integer& z) {
  BigFloat r;
  mpfr_set_z(r.backend().data(), z.get_mpz_t(), MPFR_RNDN);
  return r;
}

BigFloat pow2_neg(unsigned bits) {
  BigFloat r = 1;
  mpfr_mul_2si(r.backend().data(), r.backend().data(), -static_cast<long>(bits), MPFR_RNDN);
  return r;
}

std::string format_fixed(const BigFloat& x, int decimals) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << x;
  std::string s = os.str();
  // "-0.00000" reads badly in tables; normalise negative zero.
  if (!s.empty() && s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

BigComplex BigComplex::operator/(const BigComplex& o) const {
  BigFloat den = o.re * o.re + o.im * o.im;
  return {(re * o.re + im * o.im) / den, (im * o.re - re * o.im) / den};
}

BigFloat BigComplex::abs() const { return boost::multiprecision::sqrt(re * re + im * im); }

BigFloat big_pi() {
  BigFloat r;
  mpfr_const_pi(r.backend().data(), MPFR_RNDN);
  return r;
}

BigComplex branch_log(const BigComplex& z) {
  BigFloat mod = z.abs();
  if (mod == 0) throw std::domain_error("log of zero");
  if (z.im == 0) {
    if (z.re > 0) return {boost::multiprecision::log(z.re), 0};
    return {boost::multiprecision::log(-z.re), big_pi()};
  }
  return {boost::multiprecision::log(mod), boost::multiprecision::atan2(z.im, z.re)};
}

}  // namespace gapflow
