#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gapflow/gap_engine.hpp"
#include "gapflow/number_field.hpp"

namespace gapflow {

class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generators e_1..e_r of a finite-index unit subgroup with the rate vector
/// beta solving sum_j beta_j log|sigma_i(e_j)| = b_i, b = (-d, 1, ..., 1).
class UnitSystem {
 public:
  /// Checks norms, computes the log matrix at `bits` precision and solves
  /// for beta on the first invertible r x r row minor.
  static UnitSystem make(const NumberField& field, std::vector<FieldElement> generators, unsigned bits = 200);

  std::size_t rank() const { return generators_.size(); }
  const std::vector<FieldElement>& generators() const { return generators_; }
  /// log_matrix()[i][j] = log|sigma_i(e_j)|, rows over all r1 + r2 embeddings.
  const std::vector<std::vector<BigFloat>>& log_matrix() const { return log_matrix_; }
  const std::vector<BigFloat>& beta() const { return beta_; }
  std::vector<double> beta_double() const;
  /// Embedding rows used for the solve.
  const std::vector<std::size_t>& solve_rows() const { return solve_rows_; }
  /// max_i |(A beta - b)_i| over every embedding row.
  double residual() const { return residual_; }

  /// floor(beta_j log t) for each j.
  std::vector<long> exponents(const Rational& t) const;
  /// beta_j log t at working precision.
  std::vector<BigFloat> scaled_log(const Rational& t) const;
  /// Smallest distance from some beta_j log t to an integer; values below
  /// 1e-9 mean the floor is sensitive to rounding.
  double exponent_margin(const Rational& t) const;

 private:
  std::vector<FieldElement> generators_;
  std::vector<std::vector<BigFloat>> log_matrix_;
  std::vector<BigFloat> beta_;
  std::vector<std::size_t> solve_rows_;
  double residual_ = 0;
};

/// Certified natural log of a positive rational at BigFloat precision.
BigFloat log_rational(const Rational& t);

/// u_1(t) = prod_j e_j^floor(beta_j log t), exactly.
FieldElement unit_at(const NumberField& field, const UnitSystem& us, const Rational& t);
/// sign(sigma_1(u_1(t))) * u_1(t): the same rescaling with sigma_1 > 0, so
/// that labels are positive.
FieldElement positive_unit_at(const NumberField& field, const UnitSystem& us, const Rational& t);

/// u(t) delta_i = delta_i / u1 for every spacing, in spacing order.
std::vector<FieldElement> rescaled_spacings(const NumberField& field, const GapSpectrum& s, const FieldElement& u1);
/// Rescaled distinct spacings: index k corresponds to s.distinct[k].
std::vector<FieldElement> rescaled_distinct(const NumberField& field, const GapSpectrum& s, const FieldElement& u1);

enum class LabelMode { empirical, theoretical_box };

/// Finite label set s_1 < ... < s_J (all positive, exact).
struct LabelSet {
  std::vector<FieldElement> elements;
  LabelMode provenance = LabelMode::empirical;

  std::size_t size() const { return elements.size(); }
  /// Index of x, or nullopt.
  std::optional<std::size_t> find(const FieldElement& x) const;
  /// Adds new elements and restores the sigma_1 order. Returns the number added.
  std::size_t merge(const NumberField& field, const std::vector<FieldElement>& xs);

 private:
  std::map<FieldElement, std::size_t, FieldElementLexLess> index_;
  void reindex();
};

struct LabelSweepEntry {
  Rational t;
  std::size_t count = 0;
  std::size_t distinct = 0;
  std::size_t new_labels = 0;
  std::size_t labels_after = 0;
};

struct LabelSweep {
  LabelSet labels;
  std::vector<LabelSweepEntry> entries;
  /// First schedule index after which the set never grows (entries.size()
  /// if it grew at the last step).
  std::size_t burn_in = 0;
};

/// Empirical label set: union of rescaled spacings over the schedule.
LabelSweep label_sweep(const NumberField& field, const UnitSystem& us, const ConvexRegion& region,
                       const std::vector<Rational>& schedule);

struct TheoreticalBox {
  std::vector<double> half_widths;  // K_i per embedding coordinate (Minkowski order)
  double volume = 0;                 // box volume
  double covolume = 0;               // lattice covolume
  double expected_points = 0;        // volume / covolume
};

/// Box bounding the Minkowski image of every rescaled spacing for
/// R = [0,1)^d, given the spacing constant K' (spacing <= K'/t^d).
TheoreticalBox theoretical_box(const NumberField& field, const UnitSystem& us, double K_prime);

/// Every positive element with integer coordinates whose Minkowski image
/// lies in the box. Needs integral multiplication matrices for the
/// generators. Throws UnitError when more than `cap` candidates would be
/// scanned, quoting the box volume.
LabelSet theoretical_labels(const NumberField& field, const UnitSystem& us, const TheoreticalBox& box,
                            std::size_t cap = 5'000'000);

struct Proportions {
  std::vector<std::size_t> counts;  // |M_j(t)| per label
  std::vector<Rational> p;          // counts / (|M(t)| - 1)
  std::vector<std::uint32_t> label_of_spacing;  // per spacing index
};

/// Throws UnitError if some rescaled spacing is not a label.
Proportions proportions(const NumberField& field, const GapSpectrum& s, const LabelSet& labels,
                        const FieldElement& u1);

struct RatioStats {
  std::vector<FieldElement> ratios;  // distinct ratios delta_i / delta_{i-1}, sigma_1 order
  std::vector<std::size_t> counts;
  std::vector<Rational> freq;        // counts / (|M(t)| - 2)
};

RatioStats ratio_stats(const NumberField& field, const GapSpectrum& s);
/// Same statistic computed from rescaled spacings (u(t) cancels).
RatioStats ratio_stats_rescaled(const NumberField& field, const GapSpectrum& s, const FieldElement& u1);

struct WordStats {
  std::size_t length = 0;  // l + 1
  std::map<std::vector<std::uint32_t>, std::size_t> counts;
  std::size_t windows = 0;  // |M(t)| - l - 1
  Rational frequency(const std::vector<std::uint32_t>& word) const;
};

/// Words of l + 1 consecutive label indices over starting points
/// i = 1 .. |M(t)| - l - 1.
WordStats word_stats(const NumberField& field, const GapSpectrum& s, const LabelSet& labels, const FieldElement& u1,
                     std::size_t l);
WordStats word_stats(const Proportions& props, std::size_t l);

}  // namespace gapflow
