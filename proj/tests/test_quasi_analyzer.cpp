#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "gapflow/quasi_analyzer.hpp"
#include "test_fields.hpp"

using namespace gapflow;

namespace {

FieldElement el(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return FieldElement(v);
}

Eigen::MatrixXd to_eigen(const RationalMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j)).get_d();
  return out;
}

struct Cubic {
  NumberField F = testing::cubic7();
  UnitSystem us = UnitSystem::make(F, {el({2, -4, 1}), el({-5, 5, -1})});
  QuasiFlow qf = QuasiFlow::make(F, us);
};

const Cubic& cubic() {
  static const Cubic c;
  return c;
}

}  // namespace

TEST_CASE("matrix exponential of each logarithm recovers E_j") {
  const auto& c = cubic();
  REQUIRE(c.qf.L_matrices().size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    Eigen::MatrixXcd expL = c.qf.L_matrices()[j].exp();
    Eigen::MatrixXd E = to_eigen(c.qf.E()[j]);
    CHECK((expL - E.cast<std::complex<double>>()).norm() / E.norm() < 1e-9);
    CHECK(E == to_eigen(c.F.mult_matrix(c.us.generators()[j])));
  }
}

TEST_CASE("logarithms commute") {
  const auto& c = cubic();
  const auto& L = c.qf.L_matrices();
  Eigen::MatrixXcd comm = L[0] * L[1] - L[1] * L[0];
  CHECK(comm.norm() / (L[0].norm() * L[1].norm()) < 1e-10);
}

TEST_CASE("flow eigenvalues of the cubic example") {
  const auto& c = cubic();
  auto ev = c.qf.eigenvalues();
  REQUIRE(ev.size() == 3);
  CHECK(std::abs(ev[0] - std::complex<double>(-3.0, 3.95900)) < 1e-4);
  CHECK(std::abs(ev[1] - std::complex<double>(0.0, 6.16003)) < 1e-4);
  CHECK(std::abs(ev[2] - std::complex<double>(0.0, -2.20103)) < 1e-4);
  CHECK(c.qf.k() == 2);
  CHECK(c.qf.theta()[0] == doctest::Approx(6.16003 / (2 * M_PI)).epsilon(1e-5));
  CHECK(c.qf.gamma() == doctest::Approx(-3.0));
  CHECK(c.qf.alpha() == doctest::Approx(std::exp(0.9 * -3.0)));

  // Independent check: eigenvalues of L - I from a general eigensolver.
  Eigen::MatrixXcd LI = c.qf.L() - Eigen::MatrixXcd::Identity(3, 3);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(LI);
  for (const auto& e : ev) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < 3; ++i) best = std::min(best, std::abs(es.eigenvalues()(i) - e));
    CHECK(best < 1e-9);
  }
  // Columns of P are eigenvectors of L - I.
  for (std::size_t i = 0; i < 3; ++i) {
    Eigen::VectorXcd v = c.qf.P().col(static_cast<Eigen::Index>(i));
    CHECK((LI * v - ev[i] * v).norm() < 1e-9);
  }
  CHECK(c.qf.condition_number() > 1.0);
}

TEST_CASE("g3 prediction on the log grid") {
  const auto& c = cubic();
  double prev = 1e300;
  const std::vector<long> ts = {10, 31, 100, 316, 1000};
  for (long t : ts) {
    auto p = predict_expansion(c.qf, c.us, c.F, Rational(t));
    CHECK(p.max_imag < 1e-10);
    const double e = p.error * t;
    CHECK(e <= 10.0 / t);
    CHECK(e < prev);
    prev = e;
  }
  auto p3 = predict_expansion(c.qf, c.us, c.F, Rational(3));
  auto sc = p3.scaled();
  CHECK(sc[0] == doctest::Approx(-4.80194).epsilon(1e-5));
  CHECK(sc[1] == doctest::Approx(7.86690).epsilon(1e-5));
  CHECK(sc[2] == doctest::Approx(-1.97869).epsilon(1e-5));
}

TEST_CASE("U(t) = A(t) Uhat(t)") {
  const auto& c = cubic();
  for (long t : {3, 10, 31, 100, 316, 1000}) {
    auto rep = factorization_check(c.qf, c.us, c.F, Rational(t));
    CHECK(rep.relative_residual < 1e-8);
  }
}

TEST_CASE("g3 Jacobian matches finite differences") {
  const auto& c = cubic();
  std::vector<double> psi = {0.3, -1.7}, x = {0.25, 0.6};
  auto J = c.qf.g3_jacobian(psi, x);
  REQUIRE(J.cols() == 4);
  const double h = 1e-6;
  for (int col = 0; col < 4; ++col) {
    auto pp = psi, xp = x, pm = psi, xm = x;
    if (col < 2) {
      pp[col] += h;
      pm[col] -= h;
    } else {
      xp[col - 2] += h;
      xm[col - 2] -= h;
    }
    auto gp = c.qf.g3(pp, xp), gm = c.qf.g3(pm, xm);
    for (int r = 0; r < 3; ++r) CHECK(J(r, col) == doctest::Approx((gp[r] - gm[r]) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("g3 is periodic in the rotation angles") {
  const auto& c = cubic();
  auto a = c.qf.g3({0.1, 0.2}, {0.3, 0.4});
  auto b = c.qf.g3({1.1, -0.8}, {0.3, 0.4});
  for (int r = 0; r < 3; ++r) CHECK(a[r] == doctest::Approx(b[r]).epsilon(1e-12));
}

TEST_CASE("growth of U(t) e_i is linear in t") {
  const auto& c = cubic();
  std::vector<Rational> grid;
  for (long t : {3, 10, 31, 100, 316, 1000, 3162, 10000}) grid.emplace_back(t);
  auto g = growth_check(c.F, c.us, grid);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.min_ratio[i] > 0.01);
    CHECK(g.max_ratio[i] < 100.0);
  }
}

TEST_CASE("quadratic and mixed-signature fields give well-formed flows") {
  auto G = testing::golden();
  auto gu = UnitSystem::make(G, {el({0, 1})});
  auto gq = QuasiFlow::make(G, gu);
  CHECK(gq.dim() == 2);
  CHECK(gq.rank() == 1);
  CHECK(gq.k() == 1);
  CHECK(gq.gamma() == doctest::Approx(-2.0));
  auto gp = predict_expansion(gq, gu, G, Rational(1000));
  CHECK(gp.max_imag < 1e-10);
  CHECK(gp.error < 1e-3);

  auto C = testing::cbrt2();
  auto cu = UnitSystem::make(C, {el({-1, 1, 0})});
  auto cq = QuasiFlow::make(C, cu);
  CHECK(cq.k() == 2);
  auto ev = cq.eigenvalues();
  CHECK(std::abs(ev[1] - std::conj(ev[2])) < 1e-12);
  Eigen::MatrixXcd expL = cq.L_matrices()[0].exp();
  Eigen::MatrixXd E = to_eigen(cq.E()[0]);
  CHECK((expL - E.cast<std::complex<double>>()).norm() / E.norm() < 1e-9);
  for (long t : {10, 100, 1000}) CHECK(factorization_check(cq, cu, C, Rational(t)).relative_residual < 1e-8);
}

TEST_CASE("generic simultaneous diagonalisation") {
  const auto& c = cubic();
  std::vector<Eigen::MatrixXd> E = {to_eigen(c.qf.E()[0]), to_eigen(c.qf.E()[1])};
  auto L = commuting_logs_generic(E);
  REQUIRE(L.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    Eigen::MatrixXcd ex = L[j].exp();
    CHECK((ex - E[j].cast<std::complex<double>>()).norm() / E[j].norm() < 1e-9);
    CHECK((L[j] - c.qf.L_matrices()[j]).norm() / L[j].norm() < 1e-8);
  }
  Eigen::MatrixXd A(2, 2), B(2, 2);
  A << 2, 1, 0, 3;
  B << 1, 0, 1, 4;
  CHECK_THROWS_AS(commuting_logs_generic({A, B}), FlowError);
  CHECK(std::abs(branch_log(std::complex<double>(-2.0, 0.0)) - std::complex<double>(std::log(2.0), M_PI)) < 1e-15);
}
