#include "gapflow/region.hpp"

#include <cmath>
#include <numeric>

#include "gapflow/kernels.hpp"

namespace gapflow {

std::vector<std::vector<double>> LatticePoints::columns() const {
  std::vector<std::vector<double>> cols(d, std::vector<double>(size()));
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = static_cast<double>(data[i * d + j]);
  return cols;
}

namespace {

// Null vector of a (d-1) x d matrix by signed minors; zero if rank < d-1.
std::vector<Rational> null_vector(const std::vector<const std::vector<Rational>*>& rows, std::size_t d) {
  std::vector<Rational> y(d);
  for (std::size_t col = 0; col < d; ++col) {
    RationalMatrix minor(d - 1, d - 1);
    for (std::size_t r = 0; r + 1 < d; ++r) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < d; ++c)
        if (c != col) minor(r, cc++) = (*rows[r])[c];
    }
    Rational det = d == 1 ? Rational(1) : minor.determinant();
    y[col] = (col % 2 == 0) ? det : Rational(-det);
  }
  return y;
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& x) {
  Rational s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * x[j];
  return s;
}

// Calls fn(indices) for every k-subset of {0..n-1}.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

constexpr double kEps = 0x1p-52;

}  // namespace

ConvexRegion ConvexRegion::box(std::vector<Rational> lo, std::vector<Rational> hi) {
  if (lo.size() != hi.size() || lo.empty()) throw RegionError("box bounds must have equal, non-zero length");
  ConvexRegion r;
  r.kind_ = Kind::box;
  r.dim_ = lo.size();
  r.volume_ = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) throw RegionError("box has empty interior along axis " + std::to_string(j));
    r.volume_ *= Rational(hi[j] - lo[j]).get_d();
    r.bbox_lo_.push_back(lo[j].get_d());
    r.bbox_hi_.push_back(hi[j].get_d());
  }
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  for (std::size_t j = 0; j < r.dim_; ++j) {
    std::vector<Rational> a(r.dim_);
    a[j] = -1;
    r.rows_.push_back({a, -r.lo_[j], false});
    a[j] = 1;
    r.rows_.push_back({a, r.hi_[j], true});
  }
  r.finish_halfspace_form();
  return r;
}

ConvexRegion ConvexRegion::unit_box(std::size_t d) {
  return box(std::vector<Rational>(d, Rational(0)), std::vector<Rational>(d, Rational(1)));
}

ConvexRegion ConvexRegion::simplex(std::shared_ptr<const NumberField> field) {
  if (!field) throw RegionError("simplex region needs a field");
  ConvexRegion r;
  r.kind_ = Kind::simplex;
  r.dim_ = field->d();
  const auto& w = field->omega_double();
  double vol = 1;
  for (std::size_t j = 0; j < r.dim_; ++j) {
    if (field->sign_of(field->basis(j + 1)) <= 0) throw RegionError("simplex region needs positive generators");
    vol /= w[j] * static_cast<double>(j + 1);
    r.bbox_lo_.push_back(0);
    r.bbox_hi_.push_back(1 / w[j]);
    r.lo_.push_back(0);
    // Rational upper bound on 1/w_j, widened well beyond double error.
    r.hi_.push_back(rational_from_double(1 / w[j]) * Rational(1000001, 1000000) + Rational(1, 1000000));
  }
  r.volume_ = vol;
  r.field_ = std::move(field);
  for (std::size_t j = 0; j < r.dim_; ++j) {
    std::vector<Rational> a(r.dim_);
    a[j] = -1;
    r.rows_.push_back({a, 0, false});
  }
  r.finish_halfspace_form();
  // The weighted row is irrational; add its double form for sampling only.
  for (std::size_t j = 0; j < r.dim_; ++j) r.hs_a_.push_back(w[j]);
  r.hs_b_.push_back(1);
  r.hs_strict_.push_back(1);
  return r;
}

ConvexRegion ConvexRegion::halfspaces(std::size_t d, std::vector<Halfspace> rows) {
  if (d == 0) throw RegionError("dimension must be positive");
  for (const auto& h : rows) {
    if (h.a.size() != d) throw RegionError("halfspace row has wrong dimension");
    if (std::all_of(h.a.begin(), h.a.end(), [](const Rational& q) { return sgn(q) == 0; }))
      throw RegionError("halfspace row has zero normal");
  }
  RationalMatrix A(rows.size(), d);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < d; ++j) A(k, j) = rows[k].a[j];
  if (rows.size() < d + 1 || A.rank() < d) throw RegionError("region is unbounded");

  // Any extreme ray of {y : A y <= 0} is the null direction of d-1 rows.
  bool unbounded = false;
  for_each_subset(rows.size(), d - 1, [&](const std::vector<std::size_t>& s) {
    if (unbounded) return;
    std::vector<const std::vector<Rational>*> sub;
    for (auto k : s) sub.push_back(&rows[k].a);
    auto y = null_vector(sub, d);
    if (std::all_of(y.begin(), y.end(), [](const Rational& q) { return sgn(q) == 0; })) return;
    for (int sign : {1, -1}) {
      bool in_cone = true;
      for (const auto& h : rows)
        if (sgn(dot(h.a, y)) * sign > 0) in_cone = false;
      if (in_cone) unbounded = true;
    }
  });
  if (unbounded) throw RegionError("region is unbounded");

  std::vector<std::vector<Rational>> vertices;
  for_each_subset(rows.size(), d, [&](const std::vector<std::size_t>& s) {
    RationalMatrix M(d, d);
    std::vector<Rational> rhs(d);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t j = 0; j < d; ++j) M(r, j) = rows[s[r]].a[j];
      rhs[r] = rows[s[r]].b;
    }
    if (sgn(M.determinant()) == 0) return;
    auto x = M.solve(rhs);
    for (const auto& h : rows)
      if (dot(h.a, x) > h.b) return;
    vertices.push_back(std::move(x));
  });
  if (vertices.empty()) throw RegionError("region is empty");
  std::vector<Rational> centroid(d);
  for (const auto& v : vertices)
    for (std::size_t j = 0; j < d; ++j) centroid[j] += v[j];
  for (auto& c : centroid) c /= static_cast<long>(vertices.size());
  for (const auto& h : rows)
    if (!(dot(h.a, centroid) < h.b)) throw RegionError("region has empty interior");

  ConvexRegion r;
  r.kind_ = Kind::halfspaces;
  r.dim_ = d;
  r.lo_ = vertices.front();
  r.hi_ = vertices.front();
  for (const auto& v : vertices)
    for (std::size_t j = 0; j < d; ++j) {
      if (v[j] < r.lo_[j]) r.lo_[j] = v[j];
      if (v[j] > r.hi_[j]) r.hi_[j] = v[j];
    }
  for (std::size_t j = 0; j < d; ++j) {
    r.bbox_lo_.push_back(r.lo_[j].get_d());
    r.bbox_hi_.push_back(r.hi_[j].get_d());
  }
  r.rows_ = std::move(rows);
  r.finish_halfspace_form();
  return r;
}

void ConvexRegion::finish_halfspace_form() {
  for (const auto& h : rows_) {
    for (const auto& a : h.a) hs_a_.push_back(a.get_d());
    hs_b_.push_back(h.b.get_d());
    hs_strict_.push_back(h.strict ? 1 : 0);
  }
}

double ConvexRegion::diameter() const {
  double s = 0;
  for (std::size_t j = 0; j < dim_; ++j) s += (bbox_hi_[j] - bbox_lo_[j]) * (bbox_hi_[j] - bbox_lo_[j]);
  return std::sqrt(s);
}

int ConvexRegion::halfspace_sign(const Halfspace& h, const std::int64_t* m, const Rational& t) const {
  double v = 0, mag = 0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double term = h.a[j].get_d() * static_cast<double>(m[j]);
    v += term;
    mag += std::fabs(term);
  }
  const double bt = h.b.get_d() * t.get_d();
  v -= bt;
  mag += std::fabs(bt);
  const double err = mag * static_cast<double>(dim_ + 6) * kEps;
  if (v > err) return 1;
  if (v < -err) return -1;
  Rational s = -h.b * t;
  for (std::size_t j = 0; j < dim_; ++j) s += h.a[j] * Rational(static_cast<long>(m[j]));
  return sgn(s);
}

int ConvexRegion::simplex_sign(const std::int64_t* m, const Rational& t) const {
  const auto& w = field_->omega_double();
  double v = 0, mag = 0;
  for (std::size_t j = 0; j < dim_; ++j) {
    const double term = w[j] * static_cast<double>(m[j]);
    v += term;
    mag += std::fabs(term);
  }
  const double td = t.get_d();
  v -= td;
  mag += std::fabs(td);
  const double err = mag * static_cast<double>(dim_ + 6) * kEps;
  if (v > err) return 1;
  if (v < -err) return -1;
  std::vector<Rational> c(dim_ + 1);
  c[0] = -t;
  for (std::size_t j = 0; j < dim_; ++j) c[j + 1] = static_cast<long>(m[j]);
  return field_->sign_of(FieldElement(std::move(c)));
}

bool ConvexRegion::contains_lattice(const std::int64_t* m, const Rational& t) const {
  switch (kind_) {
    case Kind::box:
      for (std::size_t j = 0; j < dim_; ++j) {
        Rational x(static_cast<long>(m[j]));
        if (x < lo_[j] * t || !(x < hi_[j] * t)) return false;
      }
      return true;
    case Kind::simplex:
      for (std::size_t j = 0; j < dim_; ++j)
        if (m[j] < 0) return false;
      return simplex_sign(m, t) < 0;
    case Kind::halfspaces:
      for (const auto& h : rows_) {
        int s = halfspace_sign(h, m, t);
        if (s > 0 || (s == 0 && h.strict)) return false;
      }
      return true;
  }
  return false;
}

template <class Fn>
void ConvexRegion::scan(const Rational& t, Fn&& fn) const {
  if (t < 1) throw RegionError("scale t must be >= 1");
  std::vector<std::int64_t> first(dim_), last(dim_);
  for (std::size_t j = 0; j < dim_; ++j) {
    Integer a = ceil(Rational(lo_[j] * t));
    // Box rows are half-open at the top; other kinds use a closed bound.
    Integer b = kind_ == Kind::box ? Integer(ceil(Rational(hi_[j] * t)) - 1) : floor(Rational(hi_[j] * t));
    if (!a.fits_slong_p() || !b.fits_slong_p()) throw RegionError("region too large to enumerate");
    first[j] = a.get_si();
    last[j] = b.get_si();
    if (last[j] < first[j]) return;
  }
  std::vector<std::int64_t> m = first;
  while (true) {
    if (kind_ == Kind::box || contains_lattice(m.data(), t)) fn(m.data());
    std::size_t j = dim_;
    while (j > 0) {
      --j;
      if (m[j] < last[j]) {
        ++m[j];
        break;
      }
      m[j] = first[j];
      if (j == 0) return;
    }
  }
}

LatticePoints ConvexRegion::enumerate(const Rational& t) const {
  LatticePoints out;
  out.d = dim_;
  scan(t, [&](const std::int64_t* m) { out.data.insert(out.data.end(), m, m + dim_); });
  return out;
}

std::size_t ConvexRegion::count(const Rational& t) const {
  std::size_t n = 0;
  scan(t, [&](const std::int64_t*) { ++n; });
  return n;
}

void ConvexRegion::classify_shifted(const double* const* cols, std::size_t n, const std::vector<double>& shift,
                                    std::uint8_t* inside) const {
  if (kind_ == Kind::box) {
    std::vector<double> lo(dim_), hi(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      lo[j] = bbox_lo_[j] - shift[j];
      hi[j] = bbox_hi_[j] - shift[j];
    }
    kernels::classify_box(lo.data(), hi.data(), dim_, cols, n, inside);
    return;
  }
  const std::size_t rows = hs_b_.size();
  std::vector<double> b(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    double s = 0;
    for (std::size_t j = 0; j < dim_; ++j) s += hs_a_[k * dim_ + j] * shift[j];
    b[k] = hs_b_[k] - s;
  }
  kernels::classify_halfspaces(hs_a_.data(), b.data(), hs_strict_.data(), rows, dim_, cols, n, inside);
}

bool ConvexRegion::contains_double(const std::vector<double>& x) const {
  std::vector<const double*> cols(dim_);
  for (std::size_t j = 0; j < dim_; ++j) cols[j] = &x[j];
  std::uint8_t in = 0;
  classify_shifted(cols.data(), 1, std::vector<double>(dim_, 0.0), &in);
  return in != 0;
}

}  // namespace gapflow
