#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "gapflow/kernels.hpp"

using namespace gapflow::kernels;

namespace {

struct Cols {
  std::vector<std::vector<double>> data;
  std::vector<const double*> ptr;
  Cols(std::size_t d, std::size_t n, std::mt19937_64& rng, double scale) : data(d, std::vector<double>(n)) {
    std::uniform_int_distribution<long> ints(-static_cast<long>(scale), static_cast<long>(scale));
    std::uniform_real_distribution<double> reals(-1.5, 1.5);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < n; ++i)
        data[j][i] = (i % 3 == 0) ? reals(rng) : static_cast<double>(ints(rng));
    for (auto& c : data) ptr.push_back(c.data());
  }
};

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Odd sizes exercise the vector tail.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 17, 1000, 4099};

}  // namespace

TEST_CASE("dispatch reports a usable variant and can be pinned") {
  CHECK((detected_isa() == Isa::scalar || avx2::compiled()));
  force_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  force_isa(Isa::avx2);
  CHECK(active_isa() == (avx2::compiled() && detected_isa() == Isa::avx2 ? Isa::avx2 : Isa::scalar));
  force_isa(std::nullopt);
  CHECK(active_isa() == detected_isa());
  CHECK(std::string(isa_name(Isa::avx2)) == "avx2");
}

TEST_CASE("frac_linear_form: avx2 matches scalar bit for bit") {
  if (detected_isa() != Isa::avx2) return;
  std::mt19937_64 rng(7);
  const double omega[] = {0.7530203962825331, 0.5670332004060921, 0.38196601125010515, 0.1234567};
  for (std::size_t d = 1; d <= 4; ++d) {
    for (std::size_t n : kSizes) {
      Cols c(d, n, rng, 1e6);
      std::vector<double> f1(n), fl1(n), e1(n), f2(n), fl2(n), e2(n);
      std::vector<std::uint8_t> n1(n), n2(n);
      scalar::frac_linear_form(omega, d, c.ptr.data(), 0, n, {f1.data(), fl1.data(), e1.data(), n1.data()});
      avx2::frac_linear_form(omega, d, c.ptr.data(), n, {f2.data(), fl2.data(), e2.data(), n2.data()});
      CHECK(same_bits(f1, f2));
      CHECK(same_bits(fl1, fl2));
      CHECK(same_bits(e1, e2));
      CHECK(n1 == n2);
    }
  }
}

TEST_CASE("frac_linear_form: values are fractional parts within the error bound") {
  std::mt19937_64 rng(8);
  const double omega[] = {0.7530203962825331, 0.5670332004060921};
  Cols c(2, 5000, rng, 1e5);
  std::vector<double> f(5000), fl(5000), e(5000);
  std::vector<std::uint8_t> nr(5000);
  frac_linear_form(omega, 2, c.ptr.data(), 5000, {f.data(), fl.data(), e.data(), nr.data()});
  for (std::size_t i = 0; i < 5000; ++i) {
    long double v = static_cast<long double>(c.data[0][i]) * omega[0] + static_cast<long double>(c.data[1][i]) * omega[1];
    CHECK(f[i] >= 0.0);
    CHECK(f[i] < 1.0);
    CHECK(std::fabs(static_cast<double>(v - (fl[i] + f[i]))) <= e[i] + 1e-12);
    if (!nr[i]) CHECK(static_cast<long double>(fl[i]) == std::floor(v));
  }
}

TEST_CASE("classify_box and classify_halfspaces: avx2 matches scalar") {
  if (detected_isa() != Isa::avx2) return;
  std::mt19937_64 rng(9);
  for (std::size_t d = 1; d <= 3; ++d) {
    std::vector<double> lo(d, -0.5), hi(d, 0.75);
    std::vector<double> a, b;
    std::vector<std::uint8_t> strict;
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t k = 0; k < d + 2; ++k) {
      for (std::size_t j = 0; j < d; ++j) a.push_back(u(rng));
      b.push_back(u(rng));
      strict.push_back(static_cast<std::uint8_t>(k % 2));
    }
    for (std::size_t n : kSizes) {
      Cols c(d, n, rng, 1);
      // Points exactly on the box boundary.
      for (std::size_t i = 0; i < n; i += 5) c.data[0][i] = (i % 10) ? hi[0] : lo[0];
      std::vector<std::uint8_t> s1(n), s2(n), h1(n), h2(n);
      scalar::classify_box(lo.data(), hi.data(), d, c.ptr.data(), 0, n, s1.data());
      avx2::classify_box(lo.data(), hi.data(), d, c.ptr.data(), n, s2.data());
      CHECK(s1 == s2);
      scalar::classify_halfspaces(a.data(), b.data(), strict.data(), d + 2, d, c.ptr.data(), 0, n, h1.data());
      avx2::classify_halfspaces(a.data(), b.data(), strict.data(), d + 2, d, c.ptr.data(), n, h2.data());
      CHECK(h1 == h2);
    }
  }
}

TEST_CASE("classify_box follows the half-open convention") {
  const double lo[] = {0.0}, hi[] = {1.0};
  std::vector<double> x = {-1e-300, 0.0, 0.5, 1.0 - 1e-16, 1.0};
  const double* cols[] = {x.data()};
  std::vector<std::uint8_t> in(x.size());
  classify_box(lo, hi, 1, cols, x.size(), in.data());
  CHECK(in == std::vector<std::uint8_t>{0, 1, 1, 1, 0});
}
