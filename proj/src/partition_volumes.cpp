#include "gapflow/partition_volumes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

namespace gapflow {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

std::int64_t to_int64(const Rational& q, const char* what) {
  if (!is_integer(q)) throw InvariantError(std::string(what) + ": non-integral coordinate " + to_string(q));
  const Integer& z = q.get_num();
  if (!z.fits_slong_p()) throw InvariantError(std::string(what) + ": coordinate out of range");
  return z.get_si();
}

}  // namespace

ShiftVectors shift_vectors(const NumberField& field, const LabelSet& labels, const FieldElement& u1, const Rational& t) {
  ShiftVectors out;
  const double td = Rational(t).get_d();
  for (const auto& s : labels.elements) {
    auto tr = field.mul(s, u1).truncated();
    std::vector<std::int64_t> v;
    std::vector<double> nv;
    for (const auto& q : tr) {
      v.push_back(to_int64(q, "shift vector"));
      nv.push_back(static_cast<double>(v.back()) / td);
    }
    out.v.push_back(std::move(v));
    out.normalized.push_back(std::move(nv));
  }
  return out;
}

LatticePartition partition_lattice(const NumberField& field, const GapSpectrum& s, const LabelSet& labels,
                                   const FieldElement& u1, bool strict) {
  const std::size_t n = s.count(), d = s.d;
  LatticePartition out;
  out.direct.assign(n, -1);
  out.formula.assign(n, -1);
  out.next.assign(n, -1);
  out.counts.assign(labels.size(), 0);
  if (n == 0) {
    out.agree = true;
    return out;
  }

  if (n >= 2) {
    auto props = proportions(field, s, labels, u1);
    for (std::size_t i = 0; i + 1 < n; ++i) out.direct[i] = static_cast<std::int32_t>(props.label_of_spacing[i]);
  }

  auto shifts = shift_vectors(field, labels, u1, s.t);
  std::unordered_map<std::vector<std::int64_t>, std::int64_t, VecHash> where;
  where.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    where.emplace(std::vector<std::int64_t>(s.points.point(i), s.points.point(i) + d), static_cast<std::int64_t>(i));

  // The final point is excluded: its translates can wrap around mod 1.
  std::vector<std::int64_t> m(d);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::int64_t* p = s.points.point(i);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      for (std::size_t k = 0; k < d; ++k) m[k] = p[k] + shifts.v[j][k];
      auto it = where.find(m);
      if (it != where.end()) {
        out.formula[i] = static_cast<std::int32_t>(j);
        out.next[i] = it->second;
        ++out.counts[j];
        break;
      }
    }
  }
  out.agree = out.direct == out.formula;
  if (!out.agree && strict) {
    std::size_t i = 0;
    while (out.direct[i] == out.formula[i]) ++i;
    throw InvariantError("lattice partition mismatch at sorted index " + std::to_string(i) + ": spacing label " +
                         std::to_string(out.direct[i]) + ", membership label " + std::to_string(out.formula[i]));
  }
  return out;
}

std::map<std::vector<std::uint32_t>, std::size_t> word_counts_formula(const LatticePartition& part, std::size_t l) {
  std::map<std::vector<std::uint32_t>, std::size_t> out;
  std::vector<std::uint32_t> w(l + 1);
  for (std::size_t i = 0; i < part.formula.size(); ++i) {
    std::int64_t idx = static_cast<std::int64_t>(i);
    bool ok = true;
    for (std::size_t k = 0; k <= l; ++k) {
      if (idx < 0 || part.formula[idx] < 0) {
        ok = false;
        break;
      }
      w[k] = static_cast<std::uint32_t>(part.formula[idx]);
      idx = part.next[idx];
    }
    if (ok) ++out[w];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Region expressions

bool RegionExpression::contains(const std::vector<double>& x) const {
  std::vector<double> y(x.size());
  for (const auto& term : terms_) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + term.shift[k];
    if (base_->contains_double(y) != term.include) return false;
  }
  return true;
}

void RegionExpression::classify(const double* const* cols, std::size_t n, std::uint8_t* inside) const {
  std::fill(inside, inside + n, std::uint8_t{1});
  std::vector<std::uint8_t> buf(n);
  for (const auto& term : terms_) {
    base_->classify_shifted(cols, n, term.shift, buf.data());
    const std::uint8_t want = term.include ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) inside[i] &= static_cast<std::uint8_t>(buf[i] == want);
  }
}

RegionExpression RegionExpression::shifted(const std::vector<double>& shift) const {
  auto terms = terms_;
  for (auto& term : terms)
    for (std::size_t k = 0; k < shift.size(); ++k) term.shift[k] += shift[k];
  return RegionExpression(*base_, std::move(terms));
}

RegionExpression RegionExpression::intersect(const RegionExpression& o) const {
  if (base_ != o.base_) throw RegionError("intersect: expressions over different regions");
  auto terms = terms_;
  terms.insert(terms.end(), o.terms_.begin(), o.terms_.end());
  return RegionExpression(*base_, std::move(terms));
}

std::vector<RegionExpression> region_partition(const ConvexRegion& region, const std::vector<std::vector<double>>& v) {
  const std::vector<double> zero(region.dim(), 0.0);
  std::vector<RegionExpression> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    std::vector<RegionExpression::Term> terms{{zero, true}, {v[j], true}};
    for (std::size_t i = 0; i < j; ++i) terms.push_back({v[i], false});
    out.emplace_back(region, std::move(terms));
  }
  return out;
}

RegionExpression word_region(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                             const std::vector<std::uint32_t>& word) {
  if (word.empty()) throw RegionError("word_region: empty word");
  auto parts = region_partition(region, v);
  for (auto j : word)
    if (j >= parts.size()) throw RegionError("word_region: label index out of range");
  RegionExpression acc = parts[word[0]];
  std::vector<double> offset(region.dim(), 0.0);
  for (std::size_t k = 1; k < word.size(); ++k) {
    for (std::size_t c = 0; c < offset.size(); ++c) offset[c] += v[word[k - 1]][c];
    acc = acc.intersect(parts[word[k]].shifted(offset));
  }
  return acc;
}

std::string to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::exact_box: return "exact-box";
    case VolumeMethod::monte_carlo: return "monte-carlo";
    case VolumeMethod::grid: return "grid";
  }
  return "?";
}

VolumeMethod parse_volume_method(const std::string& s) {
  if (s == "exact-box") return VolumeMethod::exact_box;
  if (s == "monte-carlo") return VolumeMethod::monte_carlo;
  if (s == "grid") return VolumeMethod::grid;
  throw RegionError("unknown volume method '" + s + "' (expected exact-box, monte-carlo or grid)");
}

// ---------------------------------------------------------------------------
// Volume engine. A classifier maps a batch of points (column-major) to class
// ids in [0, ncls) or -1; the engine returns per-class volumes.

namespace {

using Classifier = std::function<void(const double* const*, std::size_t, std::int32_t*)>;

constexpr std::size_t kBlock = 4096;
constexpr std::size_t kMaxCells = std::size_t{1} << 24;

constexpr std::array<unsigned, 32> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                              59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0;
  while (i > 0) {
    r += static_cast<double>(i % base) * f;
    i /= base;
    f *= inv;
  }
  return r;
}

double bbox_volume(const ConvexRegion& R) {
  double v = 1;
  for (std::size_t k = 0; k < R.dim(); ++k) v *= R.bbox_hi()[k] - R.bbox_lo()[k];
  return v;
}

struct Tally {
  std::vector<std::vector<double>> reps;  // [replicate][class] volume
  std::vector<double> bound;              // deterministic error per class
};

// Evaluates `fn` on points given as unit-cube coordinates mapped into the bbox.
void run_blocks(const ConvexRegion& R, std::size_t n, const std::function<void(std::size_t, double*)>& unit_point,
                const Classifier& fn, const std::function<void(std::size_t, std::int32_t)>& sink) {
  const std::size_t d = R.dim();
  std::vector<std::vector<double>> cols(d, std::vector<double>(kBlock));
  std::vector<const double*> ptr(d);
  for (std::size_t k = 0; k < d; ++k) ptr[k] = cols[k].data();
  std::vector<std::int32_t> cls(kBlock);
  std::vector<double> u(d);
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t m = std::min(kBlock, n - base);
    for (std::size_t i = 0; i < m; ++i) {
      unit_point(base + i, u.data());
      for (std::size_t k = 0; k < d; ++k)
        cols[k][i] = R.bbox_lo()[k] + u[k] * (R.bbox_hi()[k] - R.bbox_lo()[k]);
    }
    fn(ptr.data(), m, cls.data());
    for (std::size_t i = 0; i < m; ++i) sink(base + i, cls[i]);
  }
}

Tally monte_carlo(const ConvexRegion& R, std::size_t ncls, const Classifier& fn, const VolumeOptions& opt) {
  const std::size_t d = R.dim();
  if (d > kPrimes.size()) throw RegionError("monte-carlo volumes support dimension up to 32");
  const std::size_t S = std::max<std::size_t>(opt.shifts, 2);
  const std::size_t per = std::max<std::size_t>(opt.samples / S, 1);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> shifts(S, std::vector<double>(d));
  for (auto& sh : shifts)
    for (auto& x : sh) x = unif(rng);

  const double vol = bbox_volume(R);
  Tally out;
  out.reps.assign(S, std::vector<double>(ncls, 0.0));
  out.bound.assign(ncls, 0.0);
  auto one = [&](std::size_t s) {
    std::vector<std::size_t> hits(ncls, 0);
    run_blocks(
        R, per,
        [&](std::size_t i, double* u) {
          for (std::size_t k = 0; k < d; ++k) {
            double x = radical_inverse(i + 1, kPrimes[k]) + shifts[s][k];
            u[k] = x >= 1.0 ? x - 1.0 : x;
          }
        },
        fn, [&](std::size_t, std::int32_t c) {
          if (c >= 0) ++hits[c];
        });
    for (std::size_t c = 0; c < ncls; ++c) out.reps[s][c] = vol * static_cast<double>(hits[c]) / static_cast<double>(per);
  };
  const unsigned W = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(S)));
  if (W == 1) {
    for (std::size_t s = 0; s < S; ++s) one(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < W; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < S; s += W) one(s);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

// Classes on the grid of cells given by per-axis breakpoints, evaluated at
// cell midpoints.
std::vector<std::int32_t> classify_cells(const ConvexRegion& R, const std::vector<std::vector<double>>& axes,
                                         const Classifier& fn, bool nodes) {
  const std::size_t d = R.dim();
  std::vector<std::size_t> extent(d);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    extent[k] = nodes ? axes[k].size() : axes[k].size() - 1;
    total *= extent[k];
    if (total > kMaxCells) throw RegionError("volume grid exceeds " + std::to_string(kMaxCells) + " cells");
  }
  std::vector<std::int32_t> out(total);
  std::vector<std::vector<double>> cols(d, std::vector<double>(kBlock));
  std::vector<const double*> ptr(d);
  for (std::size_t k = 0; k < d; ++k) ptr[k] = cols[k].data();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t base = 0; base < total; base += kBlock) {
    const std::size_t m = std::min(kBlock, total - base);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t r = base + i;
      for (std::size_t k = d; k-- > 0;) {
        idx[k] = r % extent[k];
        r /= extent[k];
      }
      for (std::size_t k = 0; k < d; ++k)
        cols[k][i] = nodes ? axes[k][idx[k]] : 0.5 * (axes[k][idx[k]] + axes[k][idx[k] + 1]);
    }
    fn(ptr.data(), m, out.data() + base);
  }
  return out;
}

double cell_volume(const std::vector<std::vector<double>>& axes, std::size_t flat) {
  double v = 1;
  for (std::size_t k = axes.size(); k-- > 0;) {
    const std::size_t e = axes[k].size() - 1;
    const std::size_t i = flat % e;
    flat /= e;
    v *= axes[k][i + 1] - axes[k][i];
  }
  return v;
}

Tally exact_box(const ConvexRegion& R, std::size_t ncls, const Classifier& fn,
                const std::vector<std::vector<double>>& shifts) {
  if (R.kind() != ConvexRegion::Kind::box) throw RegionError("exact-box volumes need a box region");
  const std::size_t d = R.dim();
  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = R.bbox_lo()[k], hi = R.bbox_hi()[k];
    auto& a = axes[k];
    a = {lo, hi};
    for (const auto& s : shifts)
      for (double b : {lo - s[k], hi - s[k]})
        if (b > lo && b < hi) a.push_back(b);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto cls = classify_cells(R, axes, fn, false);
  Tally out;
  out.reps.assign(1, std::vector<double>(ncls, 0.0));
  for (std::size_t i = 0; i < cls.size(); ++i)
    if (cls[i] >= 0) out.reps[0][cls[i]] += cell_volume(axes, i);
  const double eps = static_cast<double>(cls.size()) * 4 * std::numeric_limits<double>::epsilon() * bbox_volume(R);
  out.bound.assign(ncls, eps);
  return out;
}

Tally grid(const ConvexRegion& R, std::size_t ncls, const Classifier& fn, const VolumeOptions& opt) {
  const std::size_t d = R.dim();
  std::size_t N = std::max<std::size_t>(opt.resolution, 1);
  while (N > 1 && std::pow(static_cast<double>(N + 1), static_cast<double>(d)) > static_cast<double>(kMaxCells)) N /= 2;
  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = R.bbox_lo()[k], hi = R.bbox_hi()[k];
    for (std::size_t i = 0; i <= N; ++i) axes[k].push_back(lo + (hi - lo) * static_cast<double>(i) / N);
  }
  auto mid = classify_cells(R, axes, fn, false);
  auto node = classify_cells(R, axes, fn, true);
  Tally out;
  out.reps.assign(1, std::vector<double>(ncls, 0.0));
  out.bound.assign(ncls, 0.0);
  const double cv = bbox_volume(R) / std::pow(static_cast<double>(N), static_cast<double>(d));
  std::vector<std::size_t> idx(d);
  std::vector<std::int32_t> seen;
  for (std::size_t i = 0; i < mid.size(); ++i) {
    if (mid[i] >= 0) out.reps[0][mid[i]] += cv;
    std::size_t r = i;
    for (std::size_t k = d; k-- > 0;) {
      idx[k] = r % N;
      r /= N;
    }
    seen.assign(1, mid[i]);
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      std::size_t flat = 0;
      for (std::size_t k = 0; k < d; ++k) flat = flat * (N + 1) + idx[k] + ((corner >> k) & 1);
      if (std::find(seen.begin(), seen.end(), node[flat]) == seen.end()) seen.push_back(node[flat]);
    }
    if (seen.size() > 1)
      for (auto c : seen)
        if (c >= 0) out.bound[c] += cv;
  }
  return out;
}

Tally evaluate(const ConvexRegion& R, std::size_t ncls, const Classifier& fn,
               const std::vector<std::vector<double>>& shifts, const VolumeOptions& opt) {
  switch (opt.method) {
    case VolumeMethod::exact_box: return exact_box(R, ncls, fn, shifts);
    case VolumeMethod::grid: return grid(R, ncls, fn, opt);
    case VolumeMethod::monte_carlo: break;
  }
  return monte_carlo(R, ncls, fn, opt);
}

VolumeResult summarize(const Tally& t, std::size_t c, VolumeMethod m) {
  VolumeResult r;
  r.method = m;
  const double S = static_cast<double>(t.reps.size());
  double mean = 0;
  for (const auto& rep : t.reps) mean += rep[c];
  mean /= S;
  r.estimate = mean;
  if (t.reps.size() > 1) {
    double var = 0;
    for (const auto& rep : t.reps) var += (rep[c] - mean) * (rep[c] - mean);
    var /= S - 1;
    // Two-sided 99.73% (the normal 3-sigma level) with S - 1 degrees of freedom.
    boost::math::students_t dist(S - 1);
    r.error = boost::math::quantile(dist, 0.99865) * std::sqrt(var / S);
  }
  r.error += t.bound[c];
  return r;
}

// Class under shift set v: -1 outside R, j for P_j, v.size() for the remainder.
void partition_classes(const ConvexRegion& R, const std::vector<std::vector<double>>& v, const double* const* cols,
                       std::size_t n, std::int32_t* out, std::vector<std::uint8_t>& buf) {
  buf.resize(n);
  const std::vector<double> zero(R.dim(), 0.0);
  R.classify_shifted(cols, n, zero, buf.data());
  const std::int32_t rest = static_cast<std::int32_t>(v.size());
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i] ? rest : -1;
  for (std::size_t j = 0; j < v.size(); ++j) {
    R.classify_shifted(cols, n, v[j], buf.data());
    for (std::size_t i = 0; i < n; ++i)
      if (out[i] == rest && buf[i]) out[i] = static_cast<std::int32_t>(j);
  }
}

std::vector<std::vector<double>> with_zero(std::vector<std::vector<double>> s, std::size_t d) {
  s.emplace_back(d, 0.0);
  return s;
}

}  // namespace

VolumeResult volume(const RegionExpression& expr, const VolumeOptions& options) {
  const auto& R = expr.base();
  std::vector<std::vector<double>> shifts;
  for (const auto& term : expr.terms()) shifts.push_back(term.shift);
  Classifier fn = [&](const double* const* cols, std::size_t n, std::int32_t* out) {
    std::vector<std::uint8_t> in(n);
    expr.classify(cols, n, in.data());
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] ? 0 : -1;
  };
  auto t = evaluate(R, 1, fn, with_zero(shifts, R.dim()), options);
  return summarize(t, 0, options.method);
}

PartitionVolumes partition_volumes(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                                   const VolumeOptions& options) {
  const std::size_t J = v.size();
  Classifier fn = [&](const double* const* cols, std::size_t n, std::int32_t* out) {
    thread_local std::vector<std::uint8_t> buf;
    partition_classes(region, v, cols, n, out, buf);
  };
  auto t = evaluate(region, J + 1, fn, with_zero(v, region.dim()), options);

  PartitionVolumes out;
  for (std::size_t j = 0; j < J; ++j) out.parts.push_back(summarize(t, j, options.method));
  out.remainder = summarize(t, J, options.method);

  // Region volume and shares as derived per-replicate statistics.
  Tally derived;
  derived.reps.assign(t.reps.size(), std::vector<double>(J + 1, 0.0));
  derived.bound.assign(J + 1, 0.0);
  for (std::size_t s = 0; s < t.reps.size(); ++s) {
    double total = 0;
    for (double x : t.reps[s]) total += x;
    derived.reps[s][J] = total;
    for (std::size_t j = 0; j < J; ++j) derived.reps[s][j] = total > 0 ? t.reps[s][j] / total : 0.0;
  }
  double bound_total = 0;
  for (double b : t.bound) bound_total += b;
  derived.bound[J] = bound_total;
  out.region = summarize(derived, J, options.method);
  for (std::size_t j = 0; j < J; ++j) {
    const double total = out.region.estimate;
    derived.bound[j] = total > 0 ? t.bound[j] / total + out.parts[j].estimate * bound_total / (total * total) : 0.0;
    out.share.push_back(summarize(derived, j, options.method));
  }
  return out;
}

VolumeResult partition_disagreement(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                                    const std::vector<std::vector<double>>& w, const VolumeOptions& options) {
  Classifier fn = [&](const double* const* cols, std::size_t n, std::int32_t* out) {
    thread_local std::vector<std::uint8_t> buf;
    thread_local std::vector<std::int32_t> a, b;
    a.resize(n);
    b.resize(n);
    partition_classes(region, v, cols, n, a.data(), buf);
    partition_classes(region, w, cols, n, b.data(), buf);
    for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] >= 0 && a[i] != b[i]) ? 0 : -1;
  };
  auto shifts = v;
  shifts.insert(shifts.end(), w.begin(), w.end());
  auto t = evaluate(region, 1, fn, with_zero(shifts, region.dim()), options);
  return summarize(t, 0, options.method);
}

PredictedProportions predicted_proportions(const PartitionVolumes& vols, double region_volume) {
  PredictedProportions out;
  for (std::size_t j = 0; j < vols.parts.size(); ++j) {
    if (region_volume > 0) {
      out.value.push_back(vols.parts[j].estimate / region_volume);
      out.error.push_back(vols.parts[j].error / region_volume);
    } else {
      out.value.push_back(vols.share[j].estimate);
      out.error.push_back(vols.share[j].error);
    }
  }
  return out;
}

}  // namespace gapflow
