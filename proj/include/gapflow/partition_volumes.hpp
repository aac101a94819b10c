#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gapflow/gap_engine.hpp"
#include "gapflow/region.hpp"
#include "gapflow/unit_flow.hpp"

namespace gapflow {

struct ShiftVectors {
  std::vector<std::vector<std::int64_t>> v;       // m(s_j u_1(t)), exact
  std::vector<std::vector<double>> normalized;    // v_j / t
};

/// v_j(t) = m(s_j u_1(t)) for each label. Throws InvariantError if some
/// product has non-integral coordinates.
ShiftVectors shift_vectors(const NumberField& field, const LabelSet& labels, const FieldElement& u1, const Rational& t);

/// Two classifications of the sorted points of a spectrum. Entry i is the
/// label index of point i, or -1 for the final point.
struct LatticePartition {
  std::vector<std::int32_t> direct;   // label of the rescaled spacing to the next point
  std::vector<std::int32_t> formula;  // smallest j with m + v_j in M(t)
  std::vector<std::int64_t> next;     // sorted index of m + v_formula, or -1
  std::vector<std::size_t> counts;    // |M_j(t)| from the formula path
  bool agree = false;
};

/// Throws InvariantError when the two paths disagree and `strict` is set.
LatticePartition partition_lattice(const NumberField& field, const GapSpectrum& s, const LabelSet& labels,
                                   const FieldElement& u1, bool strict = true);

/// Counts of words j_0..j_l from the formula M_{j0..jl} = M_{j0} cap (M_{j1} - v_{j0}) cap ...
std::map<std::vector<std::uint32_t>, std::size_t> word_counts_formula(const LatticePartition& part, std::size_t l);

/// Intersection of translates of R and complements of translates:
/// x is a member iff x + s in R for every included shift s and x + s not in
/// R for every excluded shift.
class RegionExpression {
 public:
  struct Term {
    std::vector<double> shift;
    bool include = true;
  };

  RegionExpression(const ConvexRegion& base, std::vector<Term> terms) : base_(&base), terms_(std::move(terms)) {}

  const ConvexRegion& base() const { return *base_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool contains(const std::vector<double>& x) const;
  void classify(const double* const* cols, std::size_t n, std::uint8_t* inside) const;
  /// Translate by -shift: x in result iff x + shift in *this.
  RegionExpression shifted(const std::vector<double>& shift) const;
  RegionExpression intersect(const RegionExpression& o) const;

 private:
  const ConvexRegion* base_;
  std::vector<Term> terms_;
};

/// P_j(v) = [R cap (R - v_j)] minus the union of (R - v_i), i < j.
std::vector<RegionExpression> region_partition(const ConvexRegion& region, const std::vector<std::vector<double>>& v);

/// P_{j0}(v) cap (P_{j1}(v) - v_{j0}) cap (P_{j2}(v) - v_{j0} - v_{j1}) ...
RegionExpression word_region(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                             const std::vector<std::uint32_t>& word);

enum class VolumeMethod { exact_box, monte_carlo, grid };
std::string to_string(VolumeMethod m);
VolumeMethod parse_volume_method(const std::string& s);

struct VolumeOptions {
  VolumeMethod method = VolumeMethod::monte_carlo;
  std::size_t samples = std::size_t{1} << 20;  // total low-discrepancy points
  std::size_t shifts = 16;                     // random shifts for the confidence interval
  std::size_t resolution = 512;                // grid cells per axis
  std::uint64_t seed = 0x5eed;
  unsigned workers = 1;
};

struct VolumeResult {
  double estimate = 0;
  double error = 0;  // 99.73% Student-t half-width over shifts (monte-carlo) or a deterministic bound
  VolumeMethod method = VolumeMethod::monte_carlo;
};

VolumeResult volume(const RegionExpression& expr, const VolumeOptions& options = {});

struct PartitionVolumes {
  std::vector<VolumeResult> parts;  // P_1..P_J
  VolumeResult region;              // R itself
  VolumeResult remainder;           // points of R in no P_j
  std::vector<VolumeResult> share;  // vol(P_j) / vol(R) estimated on the same samples
};

/// All P_j(v) at once from one classification pass.
PartitionVolumes partition_volumes(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                                   const VolumeOptions& options = {});

/// Volume of { x in R : class under v differs from class under w }.
VolumeResult partition_disagreement(const ConvexRegion& region, const std::vector<std::vector<double>>& v,
                                    const std::vector<std::vector<double>>& w, const VolumeOptions& options = {});

struct PredictedProportions {
  std::vector<double> value;  // vol(P_j) / vol(R)
  std::vector<double> error;  // propagated volume error
};

/// With a non-negative `region_volume` the parts are divided by it, otherwise
/// the same-sample shares are used.
PredictedProportions predicted_proportions(const PartitionVolumes& vols, double region_volume = -1);

}  // namespace gapflow
