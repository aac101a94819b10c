#include "gapflow/unit_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace gapflow {

namespace mp = boost::multiprecision;

namespace {

Integer floor_integer(const BigFloat& x) {
  Integer z;
  mpfr_get_z(z.get_mpz_t(), x.backend().data(), MPFR_RNDD);
  return z;
}

// Gaussian elimination with partial pivoting; nullopt when a pivot vanishes.
std::optional<std::vector<BigFloat>> solve_big(std::vector<std::vector<BigFloat>> A, std::vector<BigFloat> b) {
  const std::size_t n = b.size();
  const BigFloat tiny = pow2_neg(200);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (mp::abs(A[r][c]) > mp::abs(A[p][c])) p = r;
    if (mp::abs(A[p][c]) <= tiny) return std::nullopt;
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      BigFloat f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<BigFloat> x(n);
  for (std::size_t r = n; r-- > 0;) {
    BigFloat s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace

BigFloat log_rational(const Rational& t) {
  if (sgn(t) <= 0) throw UnitError("log of a non-positive number");
  return mp::log(to_bigfloat(t));
}

UnitSystem UnitSystem::make(const NumberField& field, std::vector<FieldElement> generators, unsigned bits) {
  const std::size_t r = field.unit_rank();
  if (generators.size() != r)
    throw UnitError("expected " + std::to_string(r) + " unit generators, got " + std::to_string(generators.size()));
  for (const auto& e : generators) {
    if (e.size() != field.degree()) throw UnitError("generator has the wrong number of coordinates");
    if (abs(field.norm(e)) != 1) throw UnitError("generator " + e.to_string() + " is not a unit");
  }
  UnitSystem us;
  us.generators_ = std::move(generators);
  const std::size_t rows = field.num_embeddings();
  us.log_matrix_.assign(rows, std::vector<BigFloat>(r));
  for (std::size_t j = 0; j < r; ++j) {
    auto phi = field.log_embedding(us.generators_[j], bits);
    for (std::size_t i = 0; i < rows; ++i) us.log_matrix_[i][j] = phi[i];
  }
  std::vector<BigFloat> target(rows, BigFloat(1));
  target[0] = -BigFloat(static_cast<long>(field.d()));

  // Omit one row at a time, preferring the last one.
  for (std::size_t omit = rows; omit-- > 0;) {
    std::vector<std::vector<BigFloat>> A;
    std::vector<BigFloat> b;
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == omit) continue;
      A.push_back(us.log_matrix_[i]);
      b.push_back(target[i]);
      used.push_back(i);
    }
    auto beta = solve_big(A, b);
    if (!beta) continue;
    us.beta_ = *beta;
    us.solve_rows_ = used;
    BigFloat worst = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      BigFloat s = -target[i];
      for (std::size_t j = 0; j < r; ++j) s += us.log_matrix_[i][j] * us.beta_[j];
      worst = std::max(worst, BigFloat(mp::abs(s)));
    }
    us.residual_ = to_double(worst);
    return us;
  }
  throw UnitError("generators are multiplicatively dependent");
}

std::vector<double> UnitSystem::beta_double() const {
  std::vector<double> out;
  for (const auto& b : beta_) out.push_back(to_double(b));
  return out;
}

std::vector<BigFloat> UnitSystem::scaled_log(const Rational& t) const {
  if (t < 1) throw UnitError("scale t must be >= 1");
  BigFloat lt = log_rational(t);
  std::vector<BigFloat> out;
  for (const auto& b : beta_) out.push_back(b * lt);
  return out;
}

std::vector<long> UnitSystem::exponents(const Rational& t) const {
  std::vector<long> out;
  for (const auto& x : scaled_log(t)) out.push_back(floor_integer(x).get_si());
  return out;
}

double UnitSystem::exponent_margin(const Rational& t) const {
  double m = 1;
  for (const auto& x : scaled_log(t)) m = std::min(m, to_double(mp::abs(x - mp::round(x))));
  return m;
}

FieldElement unit_at(const NumberField& field, const UnitSystem& us, const Rational& t) {
  auto e = us.exponents(t);
  FieldElement u = field.one();
  for (std::size_t j = 0; j < e.size(); ++j)
    if (e[j] != 0) u = field.mul(u, field.pow(us.generators()[j], e[j]));
  return u;
}

FieldElement positive_unit_at(const NumberField& field, const UnitSystem& us, const Rational& t) {
  FieldElement u = unit_at(field, us, t);
  return field.sign_of(u) < 0 ? -u : u;
}

std::vector<FieldElement> rescaled_distinct(const NumberField& field, const GapSpectrum& s, const FieldElement& u1) {
  FieldElement u = field.inv(u1);
  std::vector<FieldElement> out;
  out.reserve(s.distinct.size());
  for (const auto& x : s.distinct) out.push_back(field.mul(x, u));
  return out;
}

std::vector<FieldElement> rescaled_spacings(const NumberField& field, const GapSpectrum& s, const FieldElement& u1) {
  auto dist = rescaled_distinct(field, s, u1);
  std::vector<FieldElement> out;
  out.reserve(s.spacing_class.size());
  for (auto c : s.spacing_class) out.push_back(dist[c]);
  return out;
}

std::optional<std::size_t> LabelSet::find(const FieldElement& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void LabelSet::reindex() {
  index_.clear();
  for (std::size_t k = 0; k < elements.size(); ++k) index_.emplace(elements[k], k);
}

std::size_t LabelSet::merge(const NumberField& field, const std::vector<FieldElement>& xs) {
  if (index_.size() != elements.size()) reindex();
  std::size_t added = 0;
  for (const auto& x : xs) {
    if (index_.count(x)) continue;
    if (field.sign_of(x) <= 0) throw UnitError("labels must be positive: " + x.to_string());
    index_.emplace(x, elements.size());
    elements.push_back(x);
    ++added;
  }
  if (added) {
    std::sort(elements.begin(), elements.end(),
              [&](const FieldElement& a, const FieldElement& b) { return field.compare(a, b) < 0; });
    reindex();
  }
  return added;
}

LabelSweep label_sweep(const NumberField& field, const UnitSystem& us, const ConvexRegion& region,
                       const std::vector<Rational>& schedule) {
  LabelSweep out;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const Rational& t = schedule[k];
    GapSpectrum s = spectrum(field, region, t);
    FieldElement u1 = positive_unit_at(field, us, t);
    std::size_t added = out.labels.merge(field, rescaled_distinct(field, s, u1));
    out.entries.push_back({t, s.count(), s.num_distinct(), added, out.labels.size()});
    if (added) out.burn_in = k + 1;
  }
  return out;
}

TheoreticalBox theoretical_box(const NumberField& field, const UnitSystem& us, double K_prime) {
  const std::size_t d = field.d();
  TheoreticalBox box;
  auto growth = [&](std::size_t i) {
    double g = 1;
    for (const auto& e : us.generators()) g *= std::max(1.0, std::abs(field.embed(e, i).approx()));
    return g;
  };
  auto omega_sum = [&](std::size_t i) {
    double s = 0;
    for (std::size_t j = 1; j <= d; ++j) s += std::abs(field.embed(field.basis(j), i).approx());
    return s;
  };
  box.half_widths.push_back(K_prime * growth(0));
  for (std::size_t i = 1; i < field.num_embeddings(); ++i) {
    double h = (0.5 + omega_sum(0) + omega_sum(i)) * growth(i);
    box.half_widths.push_back(h);
    if (i >= field.r1()) box.half_widths.push_back(h);  // Re and Im of a complex embedding
  }
  box.volume = 1;
  for (double h : box.half_widths) box.volume *= 2 * h;
  box.covolume = field.lattice_covolume();
  box.expected_points = box.volume / box.covolume;
  return box;
}

LabelSet theoretical_labels(const NumberField& field, const UnitSystem& us, const TheoreticalBox& box,
                            std::size_t cap) {
  for (const auto& e : us.generators())
    if (!field.mult_matrix(e).is_integral() || !field.mult_matrix(field.inv(e)).is_integral())
      throw UnitError("theoretical labels need generators acting by integer matrices");
  const std::size_t n = field.degree();
  Eigen::MatrixXd V(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto m = field.minkowski(field.basis(j));
    for (std::size_t i = 0; i < n; ++i) V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i];
  }
  Eigen::MatrixXd Vinv = V.inverse();
  std::vector<std::int64_t> bound(n);
  double candidates = 1;
  for (std::size_t k = 0; k < n; ++k) {
    double b = 0;
    for (std::size_t i = 0; i < n; ++i) b += std::abs(Vinv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i))) * box.half_widths[i];
    bound[k] = static_cast<std::int64_t>(std::floor(b + 1e-9));
    candidates *= static_cast<double>(2 * bound[k] + 1);
  }
  if (candidates > static_cast<double>(cap))
    throw UnitError("theoretical box too large: volume " + std::to_string(box.volume) + " (about " +
                    std::to_string(static_cast<long long>(box.expected_points)) + " lattice points, " +
                    std::to_string(static_cast<long long>(candidates)) + " candidates)");
  LabelSet labels;
  labels.provenance = LabelMode::theoretical_box;
  std::vector<FieldElement> found;
  std::vector<std::int64_t> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = -bound[k];
  Eigen::VectorXd x(n);
  while (true) {
    x.setZero();
    for (std::size_t k = 0; k < n; ++k) x += V.col(static_cast<Eigen::Index>(k)) * static_cast<double>(c[k]);
    bool inside = x(0) > 0;
    for (std::size_t i = 0; i < n && inside; ++i) inside = std::abs(x(static_cast<Eigen::Index>(i))) <= box.half_widths[i] * (1 + 1e-12);
    if (inside) {
      FieldElement e = FieldElement::from_integers(c);
      if (field.sign_of(e) > 0) found.push_back(std::move(e));
    }
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (c[k] < bound[k]) {
        ++c[k];
        break;
      }
      c[k] = -bound[k];
      if (k == 0) {
        labels.merge(field, found);
        return labels;
      }
    }
  }
}

Proportions proportions(const NumberField& field, const GapSpectrum& s, const LabelSet& labels,
                        const FieldElement& u1) {
  auto dist = rescaled_distinct(field, s, u1);
  std::vector<std::uint32_t> class_label(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) {
    auto idx = labels.find(dist[k]);
    if (!idx) throw UnitError("rescaled spacing " + dist[k].to_string() + " is not in the label set");
    class_label[k] = static_cast<std::uint32_t>(*idx);
  }
  Proportions out;
  out.counts.assign(labels.size(), 0);
  out.label_of_spacing.reserve(s.spacing_class.size());
  for (auto c : s.spacing_class) {
    out.label_of_spacing.push_back(class_label[c]);
    ++out.counts[class_label[c]];
  }
  const long denom = static_cast<long>(s.spacing_class.size());
  for (auto c : out.counts) out.p.push_back(denom ? ratio(static_cast<long>(c), denom) : Rational(0));
  return out;
}

namespace {

RatioStats ratios_from(const NumberField& field, const std::vector<FieldElement>& dist,
                       const std::vector<std::uint32_t>& classes) {
  RatioStats out;
  if (classes.size() < 2) return out;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> pair_counts;
  for (std::size_t i = 1; i < classes.size(); ++i) ++pair_counts[{classes[i - 1], classes[i]}];
  std::map<FieldElement, std::size_t, FieldElementLexLess> by_value;
  for (const auto& [pr, cnt] : pair_counts) by_value[field.div(dist[pr.second], dist[pr.first])] += cnt;
  std::vector<std::pair<FieldElement, std::size_t>> items(by_value.begin(), by_value.end());
  std::sort(items.begin(), items.end(), [&](const auto& a, const auto& b) { return field.compare(a.first, b.first) < 0; });
  const long denom = static_cast<long>(classes.size() - 1);
  for (auto& [v, cnt] : items) {
    out.ratios.push_back(v);
    out.counts.push_back(cnt);
    out.freq.push_back(ratio(static_cast<long>(cnt), denom));
  }
  return out;
}

}  // namespace

RatioStats ratio_stats(const NumberField& field, const GapSpectrum& s) {
  return ratios_from(field, s.distinct, s.spacing_class);
}

RatioStats ratio_stats_rescaled(const NumberField& field, const GapSpectrum& s, const FieldElement& u1) {
  return ratios_from(field, rescaled_distinct(field, s, u1), s.spacing_class);
}

Rational WordStats::frequency(const std::vector<std::uint32_t>& word) const {
  auto it = counts.find(word);
  if (it == counts.end() || windows == 0) return 0;
  return ratio(static_cast<long>(it->second), static_cast<long>(windows));
}

WordStats word_stats(const Proportions& props, std::size_t l) {
  WordStats w;
  w.length = l + 1;
  const auto& seq = props.label_of_spacing;
  if (seq.size() < l + 1) throw UnitError("too few spacings for words of this length");
  w.windows = seq.size() - l;
  for (std::size_t i = 0; i < w.windows; ++i)
    ++w.counts[std::vector<std::uint32_t>(seq.begin() + static_cast<long>(i), seq.begin() + static_cast<long>(i + l + 1))];
  return w;
}

WordStats word_stats(const NumberField& field, const GapSpectrum& s, const LabelSet& labels, const FieldElement& u1,
                     std::size_t l) {
  return word_stats(proportions(field, s, labels, u1), l);
}

}  // namespace gapflow
