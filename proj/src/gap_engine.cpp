#include "gapflow/gap_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "gapflow/kernels.hpp"

namespace gapflow {

FieldElement GapSpectrum::fractional_part(std::size_t i) const {
  std::vector<Rational> c(d + 1);
  c[0] = static_cast<long>(n0[i]);
  const std::int64_t* m = points.point(i);
  for (std::size_t j = 0; j < d; ++j) c[j + 1] = static_cast<long>(m[j]);
  return FieldElement(std::move(c));
}

std::vector<std::int64_t> GapSpectrum::spacing_coords(std::size_t i) const {
  std::vector<std::int64_t> c(d + 1);
  c[0] = n0[i + 1] - n0[i];
  for (std::size_t j = 0; j < d; ++j) c[j + 1] = points.point(i + 1)[j] - points.point(i)[j];
  return c;
}

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

FieldElement element(std::int64_t c0, const std::int64_t* m, std::size_t d) {
  std::vector<Rational> c(d + 1);
  c[0] = static_cast<long>(c0);
  for (std::size_t j = 0; j < d; ++j) c[j + 1] = static_cast<long>(m[j]);
  return FieldElement(std::move(c));
}

FieldElement element_diff(std::int64_t a0, const std::int64_t* a, std::int64_t b0, const std::int64_t* b,
                          std::size_t d) {
  std::vector<Rational> c(d + 1);
  c[0] = static_cast<long>(a0 - b0);
  for (std::size_t j = 0; j < d; ++j) c[j + 1] = static_cast<long>(a[j] - b[j]);
  return FieldElement(std::move(c));
}

}  // namespace

GapSpectrum spectrum(const NumberField& field, const ConvexRegion& region, const Rational& t,
                     const SpectrumOptions& options) {
  const std::size_t d = field.d();
  if (region.dim() != d) throw InvariantError("region dimension does not match the number of generators");
  LatticePoints pts = region.enumerate(t);
  const std::size_t n = pts.size();

  auto cols = pts.columns();
  std::vector<const double*> colptr(d);
  for (std::size_t j = 0; j < d; ++j) colptr[j] = cols[j].data();
  std::vector<double> frac(n), fl(n), err(n);
  std::vector<std::uint8_t> near(n);
  kernels::frac_linear_form(field.omega_double().data(), d, colptr.data(), n,
                            {frac.data(), fl.data(), err.data(), near.data()});

  std::vector<std::int64_t> n0(n);
  std::vector<double> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t* m = pts.point(i);
    if (std::all_of(m, m + d, [](std::int64_t x) { return x == 0; })) {
      n0[i] = 0;
      key[i] = 0;
      err[i] = 0;
    } else if (options.force_exact || near[i]) {
      Integer f = field.floor_sigma1(element(0, m, d));
      n0[i] = -f.get_si();
      key[i] = (fl[i] - f.get_d()) + frac[i];
    } else {
      n0[i] = -static_cast<std::int64_t>(fl[i]);
      key[i] = frac[i];
    }
  }

  std::size_t comparisons = 0;
  auto exact_less = [&](std::size_t a, std::size_t b) {
    ++comparisons;
    int s = field.sign_of(element_diff(n0[a], pts.point(a), n0[b], pts.point(b), d));
    if (s == 0 && a != b) throw InvariantError("two lattice points share a fractional part");
    return s < 0;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (options.force_exact) {
    std::sort(order.begin(), order.end(), exact_less);
  } else {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return key[a] != key[b] ? key[a] < key[b] : a < b;
    });
    // Runs of overlapping enclosures are re-sorted exactly; enclosures in
    // different runs are disjoint, so the run order is certified.
    const double slack = 0x1p-50;
    std::size_t start = 0;
    double hi = n ? key[order[0]] + err[order[0]] + slack : 0;
    for (std::size_t k = 1; k <= n; ++k) {
      const bool split = k == n || key[order[k]] - err[order[k]] - slack > hi;
      if (split) {
        if (k - start > 1) std::sort(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(k), exact_less);
        start = k;
        if (k < n) hi = key[order[k]] + err[order[k]] + slack;
      } else {
        hi = std::max(hi, key[order[k]] + err[order[k]] + slack);
      }
    }
  }

  GapSpectrum s;
  s.t = t;
  s.d = d;
  s.points.d = d;
  s.points.data.resize(n * d);
  s.n0.resize(n);
  s.value.resize(n);
  s.err.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    std::copy(pts.point(i), pts.point(i) + d, s.points.data.begin() + static_cast<long>(k * d));
    s.n0[k] = n0[i];
    s.value[k] = key[i];
    s.err[k] = err[i];
  }

  // Exact dedup of spacing vectors, then order the distinct values.
  std::unordered_map<std::vector<std::int64_t>, std::uint32_t, VecHash> ids;
  std::vector<std::vector<std::int64_t>> reps;
  if (n >= 2) s.spacing_class.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto c = s.spacing_coords(i);
    auto [it, inserted] = ids.try_emplace(c, static_cast<std::uint32_t>(reps.size()));
    if (inserted) reps.push_back(c);
    s.spacing_class[i] = it->second;
  }
  std::vector<FieldElement> elems;
  for (const auto& r : reps) elems.push_back(FieldElement::from_integers(r));
  std::vector<std::uint32_t> rank(reps.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](std::uint32_t a, std::uint32_t b) {
    ++comparisons;
    return field.compare(elems[a], elems[b]) < 0;
  });
  std::vector<std::uint32_t> remap(reps.size());
  for (std::uint32_t k = 0; k < rank.size(); ++k) {
    remap[rank[k]] = k;
    s.distinct.push_back(elems[rank[k]]);
    s.distinct_value.push_back(field.sigma1_double(elems[rank[k]]));
  }
  for (auto& c : s.spacing_class) c = remap[c];
  s.exact_comparisons = comparisons;

  if (options.check_invariants && n >= 2) {
    if (field.sign_of(s.distinct.front()) <= 0) throw InvariantError("non-positive spacing");
    FieldElement span = s.fractional_part(n - 1) - s.fractional_part(0) - field.one();
    if (field.sign_of(span) >= 0) throw InvariantError("spacings do not telescope below 1");
    if (s.fractional_part(0) != field.zero() && region.contains_lattice(std::vector<std::int64_t>(d, 0).data(), t))
      throw InvariantError("y_1 must be the fractional part 0 of the origin");
  }
  return s;
}

const std::vector<FieldElement>& distinct_spacings(const GapSpectrum& s) {
  if (s.count() < 2) throw InvariantError("distinct spacings need at least two points");
  return s.distinct;
}

ThreeGapReport three_gap_check(double omega, long t_max) {
  ThreeGapReport rep;
  if (t_max < 1) return rep;
  const std::size_t n = static_cast<std::size_t>(t_max);
  std::vector<double> ks(n), frac(n), fl(n), err(n);
  std::vector<std::uint8_t> near(n);
  std::iota(ks.begin(), ks.end(), 0.0);
  const double* cols[] = {ks.data()};
  kernels::frac_linear_form(&omega, 1, cols, n, {frac.data(), fl.data(), err.data(), near.data()});
  std::vector<std::size_t> order;
  std::vector<std::pair<long, long>> gaps;
  for (std::size_t t = 1; t <= n; ++t) {
    order.resize(t);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] < frac[b]; });
    gaps.clear();
    for (std::size_t i = 0; i + 1 < t; ++i)
      gaps.emplace_back(static_cast<long>(order[i + 1]) - static_cast<long>(order[i]),
                        static_cast<long>(fl[order[i + 1]] - fl[order[i]]));
    std::sort(gaps.begin(), gaps.end());
    const std::size_t D = static_cast<std::size_t>(std::unique(gaps.begin(), gaps.end()) - gaps.begin());
    rep.distinct_by_t.push_back(D);
    rep.max_distinct = std::max(rep.max_distinct, D);
    if (D > 3) rep.violations.push_back(static_cast<long>(t));
  }
  return rep;
}

ThreeGapReport three_gap_check(const Rational& omega, long t_max) {
  ThreeGapReport rep;
  std::vector<Rational> pts;
  for (long t = 1; t <= t_max; ++t) {
    Rational x = omega * t - omega;  // k = t - 1
    x -= Rational(floor(x));
    auto pos = std::lower_bound(pts.begin(), pts.end(), x);
    if (pos == pts.end() || *pos != x) pts.insert(pos, x);
    std::vector<Rational> gaps;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) gaps.push_back(pts[i + 1] - pts[i]);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t D = static_cast<std::size_t>(std::unique(gaps.begin(), gaps.end()) - gaps.begin());
    rep.distinct_by_t.push_back(D);
    rep.max_distinct = std::max(rep.max_distinct, D);
    if (D > 3) rep.violations.push_back(t);
  }
  return rep;
}

std::vector<EnergyLevel> energy_window(const NumberField& field, const Rational& E) {
  if (sgn(E) < 0) throw InvariantError("energy must be non-negative");
  auto shared = std::make_shared<const NumberField>(field);
  auto region = ConvexRegion::simplex(shared);
  const Rational t = E + 1;
  LatticePoints pts = region.enumerate(t);
  const std::size_t d = field.d();
  std::vector<EnergyLevel> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    FieldElement x = element(0, pts.point(i), d);
    // m0 = max(0, ceil(E - m.w)) and ceil(E - x) = -floor(x - E).
    Integer m0 = -field.floor_sigma1(x - field.from_rational(E));
    if (m0 < 0) m0 = 0;
    FieldElement energy = x + field.from_rational(Rational(m0));
    out.push_back({energy, field.sigma1_double(energy)});
  }
  std::sort(out.begin(), out.end(), [&](const EnergyLevel& a, const EnergyLevel& b) {
    if (std::fabs(a.value - b.value) > 1e-9) return a.value < b.value;
    return field.compare(a.energy, b.energy) < 0;
  });
  return out;
}

TransferenceConstant cubic_transference_constant(const NumberField& field) {
  if (field.degree() != 3 || field.r1() != 3)
    throw InvariantError("the explicit transference constant needs a totally real cubic field");
  for (std::size_t j = 1; j < 3; ++j)
    if (!field.mult_matrix(field.basis(j)).is_integral())
      throw InvariantError("the explicit transference constant needs integral generators");
  auto abs_sum = [&](std::size_t i) {
    double s = 0;
    for (std::size_t j = 1; j < 3; ++j) s += std::fabs(to_double(field.embed(field.basis(j), i).re));
    return s;
  };
  TransferenceConstant c;
  c.K = (0.5 + abs_sum(0) + abs_sum(1)) * (0.5 + abs_sum(0) + abs_sum(2));
  const double k1 = std::floor(c.K) + 1;
  c.K_prime = k1 * k1 * k1 / (4 * c.K);
  return c;
}

double max_scaled_spacing(const GapSpectrum& s) {
  if (s.distinct.empty()) return 0;
  return s.distinct_value.back() * std::pow(s.t.get_d(), static_cast<double>(s.d));
}

bool spacing_bound_check(const GapSpectrum& s, double K_prime) { return max_scaled_spacing(s) <= K_prime; }

}  // namespace gapflow
