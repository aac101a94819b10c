#include "gapflow/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace gapflow {

Polynomial::Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::monomial(const Rational& c, std::size_t power) {
  std::vector<Rational> v(power + 1);
  v[power] = c;
  return Polynomial(std::move(v));
}

void Polynomial::trim() {
  while (!coeffs_.empty() && sgn(coeffs_.back()) == 0) coeffs_.pop_back();
}

Rational Polynomial::eval(const Rational& x) const {
  Rational acc = 0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

BigFloat Polynomial::eval(const BigFloat& x) const {
  BigFloat acc = 0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + to_bigfloat(coeffs_[i]);
  return acc;
}

BigComplex Polynomial::eval(const BigComplex& x) const {
  BigComplex acc(0, 0);
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + BigComplex(to_bigfloat(coeffs_[i]), 0);
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<long>(i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::monic() const {
  if (is_zero()) return {};
  return *this * Rational(1 / leading());
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<Rational> v(std::max(coeffs_.size(), o.coeffs_.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = coeff(i) + o.coeff(i);
  return Polynomial(std::move(v));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  std::vector<Rational> v(std::max(coeffs_.size(), o.coeffs_.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = coeff(i) - o.coeff(i);
  return Polynomial(std::move(v));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<Rational> v(coeffs_.size() + o.coeffs_.size() - 1);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) v[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(v));
}

Polynomial Polynomial::operator*(const Rational& c) const {
  std::vector<Rational> v = coeffs_;
  for (auto& x : v) x *= c;
  return Polynomial(std::move(v));
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& divisor) const {
  if (divisor.is_zero()) throw std::domain_error("polynomial division by zero");
  std::vector<Rational> rem = coeffs_;
  const int dd = divisor.degree();
  if (degree() < dd) return {Polynomial(), *this};
  std::vector<Rational> quo(static_cast<std::size_t>(degree() - dd + 1));
  for (int i = degree(); i >= dd; --i) {
    const Rational& top = rem[static_cast<std::size_t>(i)];
    if (sgn(top) == 0) continue;
    Rational f = top / divisor.leading();
    quo[static_cast<std::size_t>(i - dd)] = f;
    for (int j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(i - dd + j)] -= f * divisor.coeffs_[static_cast<std::size_t>(j)];
  }
  return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
}

Polynomial Polynomial::gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    Polynomial r = a.mod(b);
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

SturmSequence::SturmSequence(const Polynomial& f) {
  chain_.push_back(f);
  chain_.push_back(f.derivative());
  while (!chain_.back().is_zero()) {
    Polynomial r = chain_[chain_.size() - 2].mod(chain_.back());
    if (r.is_zero()) break;
    chain_.push_back(r * Rational(-1));
  }
}

int SturmSequence::variations(const Rational& x) const {
  int changes = 0;
  int last = 0;
  for (const auto& p : chain_) {
    int s = sgn(p.eval(x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

int SturmSequence::count_roots(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }

Rational cauchy_root_bound(const Polynomial& f) {
  if (f.degree() < 1) return 1;
  Rational m = 0;
  for (int i = 0; i < f.degree(); ++i) {
    Rational r = abs(f.coeff(static_cast<std::size_t>(i)) / f.leading());
    if (r > m) m = r;
  }
  return m + 1;
}

RootInterval refine_root(const Polynomial& f, RootInterval iv, unsigned bits) {
  Rational target(1);
  mpq_div_2exp(target.get_mpq_t(), target.get_mpq_t(), bits);
  int s_hi = sgn(f.eval(iv.hi));
  if (s_hi == 0) {
    // Rational root sitting on the endpoint: collapse the interval onto it.
    return {iv.hi, iv.hi};
  }
  while (iv.hi - iv.lo > target) {
    Rational mid = (iv.lo + iv.hi) / 2;
    int s = sgn(f.eval(mid));
    if (s == 0) return {mid, mid};
    if (s == s_hi) {
      iv.hi = mid;
    } else {
      iv.lo = mid;
    }
  }
  return iv;
}

namespace {

void isolate(const SturmSequence& sturm, const Rational& a, const Rational& b, std::vector<RootInterval>& out) {
  int n = sturm.count_roots(a, b);
  if (n == 0) return;
  if (n == 1) {
    out.push_back({a, b});
    return;
  }
  Rational mid = (a + b) / 2;
  isolate(sturm, a, mid, out);
  isolate(sturm, mid, b, out);
}

}  // namespace

std::vector<RootInterval> isolate_real_roots(const Polynomial& f, unsigned bits) {
  if (f.degree() < 1) return {};
  Rational bound = cauchy_root_bound(f);
  SturmSequence sturm(f);
  std::vector<RootInterval> roots;
  isolate(sturm, -bound, bound, roots);
  std::vector<RootInterval> refined;
  refined.reserve(roots.size());
  for (const auto& iv : roots) {
    // A root exactly at the left end of a sibling interval belongs to the
    // previous interval's (lo, hi]; sign-based bisection needs f(lo) != 0.
    RootInterval r = iv;
    if (sgn(f.eval(r.lo)) == 0) {
      Rational nudge = (r.hi - r.lo) / 1024;
      r.lo += nudge;
    }
    if (sgn(f.eval(r.lo)) == sgn(f.eval(r.hi)) && sgn(f.eval(r.hi)) != 0)
      throw std::logic_error("root isolation lost a sign change");
    refined.push_back(refine_root(f, r, bits));
  }
  return refined;
}

}  // namespace gapflow
