#include "gapflow/number_field.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <Eigen/Dense>

namespace gapflow {

namespace mp = boost::multiprecision;

// ---------------------------------------------------------------- FieldElement

FieldElement FieldElement::from_integers(std::span<const std::int64_t> coords) {
  std::vector<Rational> v;
  v.reserve(coords.size());
  for (auto c : coords) v.emplace_back(static_cast<long>(c));
  return FieldElement(std::move(v));
}

FieldElement FieldElement::unit_vector(std::size_t n, std::size_t i) {
  std::vector<Rational> v(n);
  v.at(i) = 1;
  return FieldElement(std::move(v));
}

bool FieldElement::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Rational& q) { return sgn(q) == 0; });
}

bool FieldElement::is_rational() const {
  return std::all_of(coords_.begin() + (coords_.empty() ? 0 : 1), coords_.end(),
                     [](const Rational& q) { return sgn(q) == 0; });
}

bool FieldElement::is_integral() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Rational& q) { return q.get_den() == 1; });
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
  if (size() != o.size()) throw std::invalid_argument("field element size mismatch");
  std::vector<Rational> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = coords_[i] + o.coords_[i];
  return FieldElement(std::move(v));
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
  if (size() != o.size()) throw std::invalid_argument("field element size mismatch");
  std::vector<Rational> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = coords_[i] - o.coords_[i];
  return FieldElement(std::move(v));
}

FieldElement FieldElement::operator-() const {
  std::vector<Rational> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = -coords_[i];
  return FieldElement(std::move(v));
}

FieldElement FieldElement::operator*(const Rational& c) const {
  std::vector<Rational> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = coords_[i] * c;
  return FieldElement(std::move(v));
}

bool FieldElement::lex_less(const FieldElement& o) const {
  return std::lexicographical_compare(coords_.begin(), coords_.end(), o.coords_.begin(), o.coords_.end(),
                                      [](const Rational& a, const Rational& b) { return cmp(a, b) < 0; });
}

std::string FieldElement::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) s += ", ";
    s += gapflow::to_string(coords_[i]);
  }
  return s + ")";
}

// ------------------------------------------------------------------ Enclosure

bool Enclosure::contains(const BigFloat& x) const {
  BigFloat dx = x - re;
  return dx * dx + im * im <= radius * radius;
}

bool Enclosure::excludes_zero() const { return re * re + im * im > radius * radius; }

// ---------------------------------------------------------------- NumberField

namespace {

Integer floor_to_integer(const BigFloat& x) {
  Integer z;
  mpfr_get_z(z.get_mpz_t(), x.backend().data(), MPFR_RNDD);
  return z;
}

struct RationalInterval {
  Rational lo, hi;
};

RationalInterval interval_mul(const RationalInterval& a, const RationalInterval& b) {
  Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

// Coefficients of prod (y - roots[s]) for the chosen subset.
std::vector<BigComplex> subset_product(const std::vector<BigComplex>& roots, unsigned mask) {
  std::vector<BigComplex> poly{BigComplex(1, 0)};
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    std::vector<BigComplex> next(poly.size() + 1, BigComplex(0, 0));
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] = next[k + 1] + poly[k];
      next[k] = next[k] - poly[k] * roots[i];
    }
    poly = std::move(next);
  }
  return poly;
}

// Candidate factors come from numerical root subsets; each candidate is
// confirmed by exact division, so a "reducible" verdict is always exact.
bool is_reducible(const Polynomial& f, const std::vector<BigComplex>& roots) {
  const int n = f.degree();
  if (n <= 1) return false;
  if (n > 20) throw FieldError("irreducibility check supports degree <= 20");
  // Monic integer transform g(y) = a^{n-1} f(y / a) with roots a * z.
  const Rational a = f.leading();
  std::vector<Rational> g(static_cast<std::size_t>(n) + 1);
  Rational apow = 1;
  for (int k = n; k >= 0; --k) {
    g[static_cast<std::size_t>(k)] = f.coeff(static_cast<std::size_t>(k)) * apow / a;
    apow *= a;
  }
  Polynomial gp(g);
  std::vector<BigComplex> scaled;
  for (const auto& z : roots) scaled.push_back(z * BigComplex(to_bigfloat(a), 0));
  const BigFloat tol = pow2_neg(100);
  for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
    int size = std::popcount(mask);
    if (2 * size > n) continue;
    auto poly = subset_product(scaled, mask);
    std::vector<Rational> coeffs;
    bool integral = true;
    for (const auto& c : poly) {
      BigFloat r = mp::round(c.re);
      BigFloat scale = std::max(BigFloat(1), mp::abs(c.re));
      if (mp::abs(c.im) > tol * scale || mp::abs(c.re - r) > tol * scale) {
        integral = false;
        break;
      }
      coeffs.emplace_back(floor_to_integer(r));
    }
    if (!integral) continue;
    if (gp.mod(Polynomial(coeffs)).is_zero()) return true;
  }
  return false;
}

}  // namespace

NumberField NumberField::make(const FieldSpec& spec) {
  NumberField F;
  F.spec_ = spec;
  if (spec.minpoly.size() < 3) throw FieldError("minimal polynomial must have degree >= 2");
  std::vector<Rational> fc;
  for (const auto& c : spec.minpoly) fc.emplace_back(c);
  F.minpoly_ = Polynomial(fc);
  if (F.minpoly_.degree() != static_cast<int>(spec.minpoly.size()) - 1)
    throw FieldError("leading coefficient of the minimal polynomial is zero");
  const Polynomial& f = F.minpoly_;
  const std::size_t n = static_cast<std::size_t>(f.degree());
  F.degree_ = n;
  if (spec.root_bits == 0 || spec.root_bits > kMaxCertifiedBits)
    throw FieldError("root_bits must lie in [1, " + std::to_string(kMaxCertifiedBits) + "]");

  if (Polynomial::gcd(f, f.derivative()).degree() > 0) throw FieldError("minimal polynomial has a repeated root");

  // Real roots by Sturm bisection.
  auto real_ivs = isolate_real_roots(f, spec.root_bits);
  F.r1_ = real_ivs.size();
  if ((n - F.r1_) % 2 != 0) throw FieldError("inconsistent root count");
  F.r2_ = (n - F.r1_) / 2;

  // Complex roots: companion eigenvalues as seeds, Newton in BigFloat, then
  // a certified radius n |f(c) / f'(c)|.
  std::vector<ComplexRoot> complex_roots;
  if (F.r2_ > 0) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double lead = f.leading().get_d();
    for (std::size_t i = 0; i < n; ++i) {
      if (i + 1 < n) comp(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
      comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -f.coeff(i).get_d() / lead;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    std::vector<std::complex<double>> seeds;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i].imag() > 0) seeds.push_back(es.eigenvalues()[i]);
    std::sort(seeds.begin(), seeds.end(), [](auto a, auto b) { return a.imag() > b.imag(); });
    if (seeds.size() < F.r2_) throw FieldError("failed to locate complex roots");
    seeds.resize(F.r2_);
    const Polynomial df = f.derivative();
    for (const auto& s : seeds) {
      BigComplex z(BigFloat(s.real()), BigFloat(s.imag()));
      for (int it = 0; it < 200; ++it) {
        BigComplex step = f.eval(z) / df.eval(z);
        z = z - step;
        if (step.abs() <= pow2_neg(kBigFloatBits - 8) * (1 + z.abs())) break;
      }
      BigFloat radius = 2 * BigFloat(static_cast<long>(n)) * (f.eval(z).abs() / df.eval(z).abs()) +
                        pow2_neg(kBigFloatBits - 24) * (1 + z.abs());
      if (!(mp::abs(z.im) > 2 * radius)) throw FieldError("could not certify a non-real root");
      complex_roots.push_back({z, radius});
    }
    std::sort(complex_roots.begin(), complex_roots.end(), [](const ComplexRoot& a, const ComplexRoot& b) {
      if (a.center.re != b.center.re) return a.center.re < b.center.re;
      return a.center.im < b.center.im;
    });
    for (std::size_t i = 0; i < complex_roots.size(); ++i)
      for (std::size_t j = i + 1; j < complex_roots.size(); ++j)
        if ((complex_roots[i].center - complex_roots[j].center).abs() <= complex_roots[i].radius + complex_roots[j].radius)
          throw FieldError("complex root disks overlap; cannot certify");
  }

  // Irreducibility over Q.
  {
    std::vector<BigComplex> approx;
    for (const auto& iv : real_ivs) approx.emplace_back(to_bigfloat(Rational((iv.lo + iv.hi) / 2)), 0);
    for (const auto& c : complex_roots) {
      approx.push_back(c.center);
      approx.push_back(c.center.conj());
    }
    if (is_reducible(f, approx)) throw FieldError("minimal polynomial is reducible over Q");
  }

  // Basis change between (1, w_1, ..., w_d) and powers of the primitive element.
  if (spec.omega_defs.size() != n - 1)
    throw FieldError("expected " + std::to_string(n - 1) + " omega definitions, got " +
                     std::to_string(spec.omega_defs.size()));
  F.to_power_ = RationalMatrix(n, n);
  F.to_power_(0, 0) = 1;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    Polynomial w = Polynomial(spec.omega_defs[j]).mod(f);
    for (std::size_t k = 0; k < n; ++k) F.to_power_(k, j + 1) = w.coeff(k);
  }
  try {
    F.from_power_ = F.to_power_.inverse();
  } catch (const std::domain_error&) {
    throw FieldError("1 and the omega definitions do not form a Q-basis");
  }

  // Structure constants.
  std::vector<Polynomial> basis_poly;
  for (std::size_t j = 0; j < n; ++j) basis_poly.emplace_back(F.to_power_.column(j));
  F.mult_tensor_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Polynomial prod = (basis_poly[i] * basis_poly[j]).mod(f);
      std::vector<Rational> pc(n);
      for (std::size_t k = 0; k < n; ++k) pc[k] = prod.coeff(k);
      F.mult_tensor_[i * n + j] = FieldElement(F.from_power_ * pc);
    }

  // Designate sigma_1 from the hints.
  std::vector<RealRoot> roots;
  for (const auto& iv : real_ivs) roots.push_back({iv, refine_root(f, iv, kMaxCertifiedBits)});
  if (roots.empty()) throw FieldError("no real embedding: the basis cannot consist of real numbers");
  std::size_t chosen = 0;
  if (!spec.omega_approx.empty()) {
    if (spec.omega_approx.size() != n - 1) throw FieldError("omega_approx must have one entry per omega");
    const BigFloat tol = to_bigfloat(spec.hint_tolerance);
    std::vector<std::size_t> matches;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      BigFloat worst = 0;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        Enclosure e = F.eval_real(F.to_power_.column(j + 1), roots[k].fine);
        worst = std::max(worst, BigFloat(mp::abs(e.re - to_bigfloat(spec.omega_approx[j]))));
      }
      if (worst <= tol) matches.push_back(k);
    }
    if (matches.empty()) throw FieldError("no real embedding matches omega_approx within tolerance");
    if (matches.size() > 1) throw FieldError("ambiguous root selection: several real embeddings match omega_approx");
    chosen = matches.front();
  }
  F.real_roots_.push_back(roots[chosen]);
  for (std::size_t k = 0; k < roots.size(); ++k)
    if (k != chosen) F.real_roots_.push_back(roots[k]);
  F.complex_roots_ = std::move(complex_roots);

  for (std::size_t j = 1; j < n; ++j) F.omega_double_.push_back(to_double(F.embed(F.basis(j), 0, 120).re));
  return F;
}

FieldElement NumberField::from_rational(const Rational& q) const {
  FieldElement e = zero();
  return e + one() * q;
}

FieldElement NumberField::mul(const FieldElement& a, const FieldElement& b) const {
  if (a.size() != degree_ || b.size() != degree_) throw std::invalid_argument("field element has wrong size");
  std::vector<Rational> out(degree_);
  for (std::size_t i = 0; i < degree_; ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < degree_; ++j) {
      if (sgn(b[j]) == 0) continue;
      Rational ab = a[i] * b[j];
      const FieldElement& t = mult_tensor_[i * degree_ + j];
      for (std::size_t k = 0; k < degree_; ++k)
        if (sgn(t[k]) != 0) out[k] += ab * t[k];
    }
  }
  return FieldElement(std::move(out));
}

RationalMatrix NumberField::mult_matrix(const FieldElement& a) const {
  if (a.size() != degree_) throw std::invalid_argument("field element has wrong size");
  RationalMatrix m(degree_, degree_);
  for (std::size_t j = 0; j < degree_; ++j) {
    FieldElement col = mul(a, basis(j));
    m.set_column(j, col.coords());
  }
  return m;
}

FieldElement NumberField::inv(const FieldElement& a) const {
  if (a.is_zero()) throw FieldError("inverse of zero");
  std::vector<Rational> e1(degree_);
  e1[0] = 1;
  return FieldElement(mult_matrix(a).solve(e1));
}

FieldElement NumberField::pow(const FieldElement& a, long exponent) const {
  FieldElement base = exponent < 0 ? inv(a) : a;
  unsigned long e = exponent < 0 ? static_cast<unsigned long>(-exponent) : static_cast<unsigned long>(exponent);
  FieldElement result = one();
  while (e) {
    if (e & 1) result = mul(result, base);
    e >>= 1;
    if (e) base = mul(base, base);
  }
  return result;
}

std::vector<Rational> NumberField::power_coords(const FieldElement& a) const {
  if (a.size() != degree_) throw std::invalid_argument("field element has wrong size");
  return to_power_ * a.coords();
}

namespace {

// Horner evaluation at a disk centre plus a first-order bound over the disk
// and a generous rounding term. The slack factor absorbs rounding made while
// computing the bound itself.
Enclosure eval_on_disk(const std::vector<Rational>& p, const BigComplex& c, const BigFloat& rho, bool real) {
  BigComplex acc(0, 0);
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * c + BigComplex(to_bigfloat(p[k]), 0);
  const BigFloat r = c.abs() + rho;
  BigFloat deriv_bound = 0, mag = 0, rpow = 1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    BigFloat ak = mp::abs(to_bigfloat(p[k]));
    mag += ak * rpow;
    if (k + 1 < p.size()) deriv_bound += BigFloat(static_cast<long>(k + 1)) * mp::abs(to_bigfloat(p[k + 1])) * rpow;
    rpow *= r;
  }
  BigFloat rounding = pow2_neg(kBigFloatBits - 16) * mag * BigFloat(static_cast<long>(p.size() + 2));
  Enclosure e;
  e.re = acc.re;
  e.im = real ? BigFloat(0) : acc.im;
  e.radius = 2 * (rho * deriv_bound + rounding);
  e.real = real;
  return e;
}

}  // namespace

Enclosure NumberField::eval_real(const std::vector<Rational>& p, const RootInterval& iv) const {
  Rational mid = (iv.lo + iv.hi) / 2;
  BigFloat c = to_bigfloat(mid);
  BigFloat rho = to_bigfloat(Rational((iv.hi - iv.lo) / 2)) + mp::abs(c) * pow2_neg(kBigFloatBits - 2);
  return eval_on_disk(p, BigComplex(c, 0), rho, true);
}

Enclosure NumberField::eval_complex(const std::vector<Rational>& p, const ComplexRoot& root) const {
  return eval_on_disk(p, root.center, root.radius, false);
}

Enclosure NumberField::embed(const FieldElement& a, std::size_t i, unsigned bits) const {
  if (bits == 0 || bits > kMaxCertifiedBits)
    throw FieldError("precision request outside [1, " + std::to_string(kMaxCertifiedBits) + "] bits");
  if (i >= num_embeddings()) throw std::out_of_range("embedding index out of range");
  auto p = power_coords(a);
  if (i < r1_) {
    const RealRoot& root = real_roots_[i];
    return eval_real(p, bits <= spec_.root_bits ? root.coarse : root.fine);
  }
  return eval_complex(p, complex_roots_[i - r1_]);
}

std::vector<BigComplex> NumberField::all_embeddings(const FieldElement& a, unsigned bits) const {
  std::vector<BigComplex> out;
  out.reserve(degree_);
  for (std::size_t i = 0; i < r1_; ++i) out.emplace_back(embed(a, i, bits).re, 0);
  for (std::size_t j = 0; j < r2_; ++j) {
    Enclosure e = embed(a, r1_ + j, bits);
    out.emplace_back(e.re, e.im);
    out.emplace_back(e.re, -e.im);
  }
  return out;
}

std::vector<double> NumberField::minkowski(const FieldElement& a) const {
  std::vector<double> out;
  out.reserve(degree_);
  for (std::size_t i = 0; i < r1_; ++i) out.push_back(to_double(embed(a, i).re));
  for (std::size_t j = 0; j < r2_; ++j) {
    Enclosure e = embed(a, r1_ + j);
    out.push_back(to_double(e.re));
    out.push_back(to_double(e.im));
  }
  return out;
}

std::vector<BigFloat> NumberField::log_embedding(const FieldElement& u, unsigned bits) const {
  if (u.is_zero()) throw FieldError("log embedding of zero");
  std::vector<BigFloat> out;
  for (std::size_t i = 0; i < num_embeddings(); ++i) {
    Enclosure e = embed(u, i, bits);
    if (!e.excludes_zero()) throw FieldError("embedding too close to zero for the requested precision");
    out.push_back(mp::log(BigComplex(e.re, e.im).abs()));
  }
  return out;
}

int NumberField::exact_sign_sigma1(const std::vector<Rational>& p) const {
  RootInterval iv = real_roots_[0].fine;
  for (unsigned bits = 2 * kMaxCertifiedBits; bits <= (1u << 16); bits *= 2) {
    iv = refine_root(minpoly_, iv, bits);
    RationalInterval x{iv.lo, iv.hi};
    RationalInterval acc{p.back(), p.back()};
    for (std::size_t k = p.size() - 1; k-- > 0;) {
      acc = interval_mul(acc, x);
      acc.lo += p[k];
      acc.hi += p[k];
    }
    if (sgn(acc.lo) > 0) return 1;
    if (sgn(acc.hi) < 0) return -1;
  }
  throw FieldError("sign could not be certified");
}

int NumberField::sign_of(const FieldElement& a) const {
  if (a.is_zero()) return 0;
  if (a.is_rational()) return sgn(a[0]);
  for (unsigned bits : {spec_.root_bits, kMaxCertifiedBits}) {
    Enclosure e = embed(a, 0, bits);
    if (e.excludes_zero()) return e.re > 0 ? 1 : -1;
  }
  return exact_sign_sigma1(power_coords(a));
}

Integer NumberField::floor_sigma1(const FieldElement& a) const {
  if (a.is_rational()) return floor(a[0]);
  for (unsigned bits : {spec_.root_bits, kMaxCertifiedBits}) {
    Enclosure e = embed(a, 0, bits);
    Integer lo = floor_to_integer(BigFloat(e.re - e.radius));
    Integer hi = floor_to_integer(BigFloat(e.re + e.radius));
    if (lo == hi) return lo;
  }
  Integer c = floor_to_integer(embed(a, 0, kMaxCertifiedBits).re);
  // sigma_1(a) is irrational here, so the comparisons below are strict.
  while (sign_of(a - from_rational(Rational(c))) < 0) c -= 1;
  while (sign_of(a - from_rational(Rational(c + 1))) > 0) c += 1;
  return c;
}

double NumberField::sigma1_double(const FieldElement& a) const { return to_double(embed(a, 0).re); }

double NumberField::lattice_covolume() const {
  const auto n = static_cast<Eigen::Index>(degree_);
  Eigen::MatrixXd v(n, n);
  for (std::size_t j = 0; j < degree_; ++j) {
    auto m = minkowski(basis(j));
    for (std::size_t i = 0; i < degree_; ++i) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i];
  }
  return std::abs(v.determinant());
}

}  // namespace gapflow
