#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gapflow/unit_flow.hpp"
#include "test_fields.hpp"

using namespace gapflow;

namespace {

FieldElement el(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return FieldElement(v);
}

std::vector<FieldElement> cubic7_units() { return {el({2, -4, 1}), el({-5, 5, -1})}; }

std::array<long double, 3> cubic7_roots() {
  std::array<long double, 3> r;
  for (int k = 1; k <= 3; ++k) {
    long double s = std::sin(k * std::numbers::pi_v<long double> / 7);
    r[k - 1] = 4 * s * s;
  }
  return r;
}

// beta from the first two embedding rows, b = (-2, 1).
std::array<long double, 2> oracle_beta() {
  auto r = cubic7_roots();
  auto l1 = [](long double x) { return std::log(std::fabs(2 - 4 * x + x * x)); };
  auto l2 = [](long double x) { return std::log(std::fabs(-5 + 5 * x - x * x)); };
  long double a = l1(r[0]), b = l2(r[0]), c = l1(r[1]), d = l2(r[1]);
  long double det = a * d - b * c;
  return {(-2 * d - b * 1) / det, (a * 1 - c * -2) / det};
}

}  // namespace

TEST_CASE("rate vector for the cubic units") {
  auto F = testing::cubic7();
  auto us = UnitSystem::make(F, cubic7_units());
  auto o = oracle_beta();
  auto b = us.beta_double();
  CHECK(b[0] == doctest::Approx(static_cast<double>(o[0])).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(static_cast<double>(o[1])).epsilon(1e-14));
  CHECK(std::fabs(b[0] - 1.96080) < 1e-5);
  CHECK(std::fabs(b[1] + 0.70061) < 1e-5);
  // The third row holds because the product of the embeddings has absolute value one.
  CHECK(us.residual() < 1e-50);
}

TEST_CASE("u1(t) on the log grid") {
  auto F = testing::cubic7();
  auto us = UnitSystem::make(F, cubic7_units());
  const std::vector<std::pair<long, FieldElement>> rows = {
      {3, el({-5, 8, -2})},       {10, el({-3, 4, 0})},    {31, el({-41, 68, -18})},
      {100, el({186, -308, 81})}, {316, el({-20, 74, -63})}, {1000, el({424, -609, 61})}};
  auto o = oracle_beta();
  for (const auto& [t, u] : rows) {
    CHECK(unit_at(F, us, Rational(t)) == u);
    auto ex = us.exponents(Rational(t));
    CHECK(ex[0] == static_cast<long>(std::floor(o[0] * std::log(static_cast<long double>(t)))));
    CHECK(ex[1] == static_cast<long>(std::floor(o[1] * std::log(static_cast<long double>(t)))));
    CHECK(us.exponent_margin(Rational(t)) > 1e-9);
    auto pu = positive_unit_at(F, us, Rational(t));
    CHECK(F.sign_of(pu) > 0);
    CHECK((pu == u || pu == -u));
  }
}

TEST_CASE("unit system rejects bad generators") {
  auto F = testing::cubic7();
  CHECK_THROWS_AS(UnitSystem::make(F, {el({2, -4, 1})}), UnitError);
  CHECK_THROWS_AS(UnitSystem::make(F, {el({2, -4, 1}), el({0, 1, 0})}), UnitError);
  CHECK_THROWS_AS(UnitSystem::make(F, {el({1, 0, 0}), el({-5, 5, -1})}), UnitError);
  auto e = el({2, -4, 1});
  CHECK_THROWS_AS(UnitSystem::make(F, {e, F.mul(e, e)}), UnitError);
}

TEST_CASE("rescaled spacings are bounded and match the label set") {
  auto F = testing::cubic7();
  auto us = UnitSystem::make(F, cubic7_units());
  auto R = ConvexRegion::unit_box(2);
  std::vector<Rational> sched = {Rational(10), Rational(17), Rational(31), Rational(56), Rational(100)};
  auto sw = label_sweep(F, us, R, sched);
  REQUIRE(sw.entries.size() == sched.size());
  std::size_t total = 0;
  for (const auto& e : sw.entries) {
    total += e.new_labels;
    CHECK(e.labels_after == total);
  }
  CHECK(sw.labels.size() == total);
  for (std::size_t j = 0; j < sw.labels.size(); ++j) {
    CHECK(F.sign_of(sw.labels.elements[j]) > 0);
    if (j) CHECK(F.compare(sw.labels.elements[j - 1], sw.labels.elements[j]) < 0);
  }
  for (const auto& t : sched) {
    auto s = spectrum(F, R, t);
    auto u1 = positive_unit_at(F, us, t);
    auto rs = rescaled_spacings(F, s, u1);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      CHECK(sw.labels.find(rs[i]).has_value());
      CHECK(F.mul(rs[i], u1) == s.spacing(i));
      CHECK(F.sigma1_double(rs[i]) < 10.0);
    }
  }
}

TEST_CASE("proportions, ratios and words") {
  auto F = testing::cubic7();
  auto us = UnitSystem::make(F, cubic7_units());
  auto R = ConvexRegion::unit_box(2);
  const Rational t(60);
  auto s = spectrum(F, R, t);
  auto u1 = positive_unit_at(F, us, t);
  LabelSet labels;
  labels.merge(F, rescaled_distinct(F, s, u1));
  auto props = proportions(F, s, labels, u1);
  Rational sum = 0;
  std::size_t cnt = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    sum += props.p[j];
    cnt += props.counts[j];
  }
  CHECK(sum == 1);
  CHECK(cnt == s.count() - 1);

  auto rs = ratio_stats(F, s);
  Rational fs = 0;
  for (const auto& f : rs.freq) fs += f;
  CHECK(fs == 1);
  auto rr = ratio_stats_rescaled(F, s, u1);
  CHECK(rr.ratios == rs.ratios);
  CHECK(rr.counts == rs.counts);

  for (std::size_t l : {0, 1, 2}) {
    auto ws = word_stats(props, l);
    CHECK(ws.windows == s.count() - l - 1);
    std::size_t c = 0;
    for (const auto& [w, k] : ws.counts) {
      CHECK(w.size() == l + 1);
      c += k;
    }
    CHECK(c == ws.windows);
    auto direct = word_stats(F, s, labels, u1, l);
    CHECK(direct.counts == ws.counts);
  }
  auto w0 = word_stats(props, 0);
  for (const auto& [w, k] : w0.counts) CHECK(k == props.counts[w[0]]);

  LabelSet partial;
  partial.merge(F, {labels.elements[0]});
  if (labels.size() > 1) CHECK_THROWS_AS(proportions(F, s, partial, u1), UnitError);
}

TEST_CASE("theoretical label box") {
  auto F = testing::cubic7();
  auto us = UnitSystem::make(F, cubic7_units());
  auto box = theoretical_box(F, us, 10613.0);
  CHECK(box.volume > 0);
  CHECK(box.expected_points == doctest::Approx(box.volume / box.covolume));
  CHECK_THROWS_AS(theoretical_labels(F, us, box, 1000), UnitError);

  auto G = testing::golden();
  auto gu = UnitSystem::make(G, {el({0, 1})});
  auto gbox = theoretical_box(G, gu, 3.0);
  auto th = theoretical_labels(G, gu, gbox);
  CHECK(th.size() > 0);
  auto R = ConvexRegion::unit_box(1);
  for (long t = 2; t <= 200; t += 7) {
    auto s = spectrum(G, R, Rational(t));
    CHECK(max_scaled_spacing(s) <= 3.0);
    for (const auto& x : rescaled_distinct(G, s, positive_unit_at(G, gu, Rational(t))))
      CHECK(th.find(x).has_value());
  }
}
