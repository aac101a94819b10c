#include <cmath>
#include <memory>

#include "doctest.h"
#include "gapflow/partition_volumes.hpp"
#include "test_fields.hpp"

using namespace gapflow;

namespace {

FieldElement el(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return FieldElement(v);
}

struct Setup {
  NumberField F = testing::cubic7();
  UnitSystem us = UnitSystem::make(F, {el({2, -4, 1}), el({-5, 5, -1})});
};

const Setup& setup() {
  static const Setup s;
  return s;
}

LabelSet labels_at(const Setup& S, const GapSpectrum& s, const FieldElement& u1) {
  LabelSet l;
  l.merge(S.F, rescaled_distinct(S.F, s, u1));
  return l;
}

VolumeOptions with(VolumeMethod m) {
  VolumeOptions o;
  o.method = m;
  o.samples = std::size_t{1} << 17;
  o.resolution = 256;
  return o;
}

}  // namespace

TEST_CASE("shift vectors: exact product and multiplication matrix agree") {
  const auto& S = setup();
  auto R = ConvexRegion::unit_box(2);
  for (long t : {20, 100}) {
    auto s = spectrum(S.F, R, Rational(t));
    auto u1 = positive_unit_at(S.F, S.us, Rational(t));
    auto labels = labels_at(S, s, u1);
    auto sv = shift_vectors(S.F, labels, u1, Rational(t));
    auto U = S.F.mult_matrix(u1);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      auto col = S.F.mult_matrix(labels.elements[j]) * U;
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(col(k + 1, 0) == sv.v[j][k]);
        CHECK(sv.normalized[j][k] == doctest::Approx(static_cast<double>(sv.v[j][k]) / t));
      }
    }
  }
}

TEST_CASE("lattice partition: membership formula equals direct labels") {
  const auto& S = setup();
  auto boxR = ConvexRegion::unit_box(2);
  auto simplexR = ConvexRegion::simplex(std::make_shared<const NumberField>(S.F));
  for (const ConvexRegion* R : {&boxR, &simplexR}) {
    for (long t : {20, 50, 100}) {
      auto s = spectrum(S.F, *R, Rational(t));
      auto u1 = positive_unit_at(S.F, S.us, Rational(t));
      auto labels = labels_at(S, s, u1);
      auto part = partition_lattice(S.F, s, labels, u1);
      CHECK(part.agree);
      CHECK(part.formula.back() == -1);
      std::size_t total = 0;
      for (auto c : part.counts) total += c;
      CHECK(total == s.count() - 1);
      auto props = proportions(S.F, s, labels, u1);
      CHECK(part.counts == props.counts);
      for (std::size_t i = 0; i + 1 < s.count(); ++i) CHECK(part.next[i] == static_cast<std::int64_t>(i + 1));
      for (std::size_t l : {1, 2}) CHECK(word_counts_formula(part, l) == word_stats(props, l).counts);
    }
  }
}

TEST_CASE("translated box intersections against closed forms") {
  auto R = ConvexRegion::unit_box(2);
  const std::vector<double> zero = {0, 0}, a = {0.3, -0.45};
  const double both = (1 - 0.3) * (1 - 0.45);
  RegionExpression inter(R, {{zero, true}, {a, true}});
  RegionExpression diff(R, {{zero, true}, {a, false}});
  for (auto m : {VolumeMethod::exact_box, VolumeMethod::monte_carlo, VolumeMethod::grid}) {
    auto vi = volume(inter, with(m));
    auto vd = volume(diff, with(m));
    CHECK(std::fabs(vi.estimate - both) <= vi.error + 1e-12);
    CHECK(std::fabs(vd.estimate - (1 - both)) <= vd.error + 1e-12);
    if (m == VolumeMethod::exact_box) CHECK(vi.error < 1e-9);
  }
  CHECK(inter.contains({0.5, 0.5}));
  CHECK_FALSE(inter.contains({0.5, 0.2}));
  auto sh = inter.shifted({0.1, 0.1});
  CHECK(sh.contains({0.4, 0.4}));
}

TEST_CASE("simplex volume by sampling") {
  const auto& S = setup();
  auto R = ConvexRegion::simplex(std::make_shared<const NumberField>(S.F));
  RegionExpression all(R, {{{0, 0}, true}});
  auto v = volume(all, with(VolumeMethod::monte_carlo));
  CHECK(std::fabs(v.estimate - R.volume()) <= v.error);
  CHECK(v.error < 1e-2 * R.volume());
  auto g = volume(all, with(VolumeMethod::grid));
  CHECK(std::fabs(g.estimate - R.volume()) <= g.error);
  CHECK_THROWS_AS(volume(all, with(VolumeMethod::exact_box)), RegionError);
}

TEST_CASE("partition volumes: consistency, determinism and lattice agreement") {
  const auto& S = setup();
  auto R = ConvexRegion::unit_box(2);
  const Rational t(200);
  auto s = spectrum(S.F, R, t);
  auto u1 = positive_unit_at(S.F, S.us, t);
  auto labels = labels_at(S, s, u1);
  auto sv = shift_vectors(S.F, labels, u1, t);
  auto props = proportions(S.F, s, labels, u1);

  auto exact = partition_volumes(R, sv.normalized, with(VolumeMethod::exact_box));
  double sum = exact.remainder.estimate;
  for (const auto& p : exact.parts) sum += p.estimate;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.region.estimate == doctest::Approx(1.0).epsilon(1e-12));

  auto mc = partition_volumes(R, sv.normalized, with(VolumeMethod::monte_carlo));
  auto grid = partition_volumes(R, sv.normalized, with(VolumeMethod::grid));
  auto pred = predicted_proportions(exact, 1.0);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    CHECK(std::fabs(mc.parts[j].estimate - exact.parts[j].estimate) <= mc.parts[j].error + 1e-12);
    CHECK(std::fabs(grid.parts[j].estimate - exact.parts[j].estimate) <= grid.parts[j].error + 1e-12);
    CHECK(std::fabs(Rational(props.p[j]).get_d() - pred.value[j]) < 5.0 / 200);
    // A single-label word region is the partition cell itself.
    auto w = volume(word_region(R, sv.normalized, {static_cast<std::uint32_t>(j)}), with(VolumeMethod::exact_box));
    CHECK(w.estimate == doctest::Approx(exact.parts[j].estimate).epsilon(1e-9));
  }

  auto again = partition_volumes(R, sv.normalized, with(VolumeMethod::monte_carlo));
  auto opts = with(VolumeMethod::monte_carlo);
  opts.workers = 3;
  auto threaded = partition_volumes(R, sv.normalized, opts);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    CHECK(again.parts[j].estimate == mc.parts[j].estimate);
    CHECK(threaded.parts[j].estimate == mc.parts[j].estimate);
    CHECK(threaded.parts[j].error == mc.parts[j].error);
  }
}

TEST_CASE("partition cells move Lipschitz-continuously with v") {
  const auto& S = setup();
  auto R = ConvexRegion::unit_box(2);
  const Rational t(100);
  auto s = spectrum(S.F, R, t);
  auto u1 = positive_unit_at(S.F, S.us, t);
  auto sv = shift_vectors(S.F, labels_at(S, s, u1), u1, t);
  auto opt = with(VolumeMethod::exact_box);
  CHECK(partition_disagreement(R, sv.normalized, sv.normalized, opt).estimate == 0.0);
  std::vector<double> ratios;
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    auto w = sv.normalized;
    for (auto& v : w) {
      v[0] += eta;
      v[1] -= eta / 2;
    }
    ratios.push_back(partition_disagreement(R, sv.normalized, w, opt).estimate / eta);
  }
  for (double r : ratios) {
    CHECK(r > 0);
    CHECK(r < 20.0 * static_cast<double>(sv.v.size()));
  }
  CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(0.2));
}

TEST_CASE("volume method names") {
  CHECK(parse_volume_method("exact-box") == VolumeMethod::exact_box);
  CHECK(to_string(VolumeMethod::monte_carlo) == "monte-carlo");
  CHECK_THROWS_AS(parse_volume_method("simpson"), RegionError);
}
