#pragma once

#include <cstdint>
#include <vector>

#include "gapflow/number_field.hpp"
#include "gapflow/region.hpp"

namespace gapflow {

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted fractional parts y_1 < ... < y_N of m . w over m in M(t), with
/// exact spacings. Every y_i is n0_i + m_i . w for integers n0_i, m_i, so
/// spacings are integer coordinate vectors as well.
struct GapSpectrum {
  Rational t;
  std::size_t d = 0;
  LatticePoints points;           // m_i in sorted order
  std::vector<std::int64_t> n0;   // constant coordinate of y_i
  std::vector<double> value;      // y_i rounded
  std::vector<double> err;        // |value - y_i| bound
  std::vector<std::uint32_t> spacing_class;  // delta_i is distinct[spacing_class[i]]
  std::vector<FieldElement> distinct;        // Delta_1 < ... < Delta_D
  std::vector<double> distinct_value;
  std::size_t exact_comparisons = 0;  // sign_of calls spent on sorting

  std::size_t count() const { return n0.size(); }
  std::size_t num_distinct() const { return distinct.size(); }
  FieldElement fractional_part(std::size_t i) const;
  const FieldElement& spacing(std::size_t i) const { return distinct[spacing_class[i]]; }
  std::vector<std::int64_t> spacing_coords(std::size_t i) const;
};

struct SpectrumOptions {
  /// Skip the double fast path: exact floors and an exact comparison sort.
  bool force_exact = false;
  /// Verify injectivity, positivity and the telescoping sum exactly.
  bool check_invariants = true;
};

GapSpectrum spectrum(const NumberField& field, const ConvexRegion& region, const Rational& t,
                     const SpectrumOptions& options = {});

/// Delta_1 < ... < Delta_D. Throws InvariantError with fewer than two points.
const std::vector<FieldElement>& distinct_spacings(const GapSpectrum& s);

struct ThreeGapReport {
  std::size_t max_distinct = 0;
  std::vector<long> violations;  // t values with more than three spacings
  std::vector<std::size_t> distinct_by_t;  // index t - 1
};

/// Points {k w}, 0 <= k < t, for every integer t in [1, t_max]. A spacing is
/// identified by its integer form (dk, dn) with value dk * w - dn.
ThreeGapReport three_gap_check(double omega, long t_max);
/// Rational w: coincident points are merged and spacings compared exactly.
ThreeGapReport three_gap_check(const Rational& omega, long t_max);

struct EnergyLevel {
  FieldElement energy;  // m0 + m . w
  double value = 0;
};

/// Energies m0 + m . w in [E, E + 1) with m_j >= 0, m0 >= 0, sorted
/// ascending. Each admissible m contributes exactly one level.
std::vector<EnergyLevel> energy_window(const NumberField& field, const Rational& E);

struct TransferenceConstant {
  double K = 0;
  double K_prime = 0;
};

/// Explicit K and K' = (floor(K) + 1)^3 / (4K) for a totally real cubic
/// field whose generators are algebraic integers, with R = [0,1)^2.
TransferenceConstant cubic_transference_constant(const NumberField& field);

/// max_i Delta_i(t) * t^d <= K'.
bool spacing_bound_check(const GapSpectrum& s, double K_prime);
double max_scaled_spacing(const GapSpectrum& s);

}  // namespace gapflow
