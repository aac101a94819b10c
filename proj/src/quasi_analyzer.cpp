#include "gapflow/quasi_analyzer.hpp"

#include <cmath>
#include <numbers>

namespace gapflow {

namespace mp = boost::multiprecision;

namespace {

BigComplex big_exp(const BigComplex& z) {
  BigFloat m = mp::exp(z.re);
  return {m * mp::cos(z.im), m * mp::sin(z.im)};
}

BigComplex scale(const BigComplex& z, const BigFloat& s) { return {z.re * s, z.im * s}; }

std::complex<double> to_cd(const BigComplex& z) { return z.to_complex(); }

std::vector<std::vector<BigComplex>> invert(std::vector<std::vector<BigComplex>> A) {
  const std::size_t n = A.size();
  std::vector<std::vector<BigComplex>> inv(n, std::vector<BigComplex>(n, BigComplex(0, 0)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = BigComplex(1, 0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (A[r][c].abs() > A[p][c].abs()) p = r;
    if (A[p][c].abs() <= pow2_neg(250)) throw FlowError("embedding matrix is singular (repeated embedding values)");
    std::swap(A[p], A[c]);
    std::swap(inv[p], inv[c]);
    BigComplex piv = A[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      A[c][k] = A[c][k] / piv;
      inv[c][k] = inv[c][k] / piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      BigComplex f = A[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        A[r][k] = A[r][k] - f * A[c][k];
        inv[r][k] = inv[r][k] - f * inv[c][k];
      }
    }
  }
  return inv;
}

BigFloat frac_part(const BigFloat& x) { return x - mp::floor(x); }

}  // namespace

std::complex<double> branch_log(std::complex<double> z) {
  if (z == 0.0) throw FlowError("log of zero");
  if (z.imag() == 0 && z.real() < 0) return {std::log(-z.real()), std::numbers::pi};
  return std::log(z);
}

QuasiFlow QuasiFlow::make(const NumberField& field, const UnitSystem& us, const FlowOptions& options) {
  QuasiFlow q;
  q.n_ = field.degree();
  q.r_ = us.rank();
  const std::size_t n = q.n_, r = q.r_;
  for (const auto& e : us.generators()) q.E_.push_back(field.mult_matrix(e));

  q.V_.assign(n, std::vector<BigComplex>(n));
  for (std::size_t j = 0; j < n; ++j) {
    auto emb = field.all_embeddings(field.basis(j), kMaxCertifiedBits);
    for (std::size_t i = 0; i < n; ++i) q.V_[i][j] = emb[i];
  }
  q.Q_ = invert(q.V_);

  q.logs_.resize(n * r);
  for (std::size_t j = 0; j < r; ++j) {
    auto emb = field.all_embeddings(us.generators()[j], kMaxCertifiedBits);
    for (std::size_t i = 0; i < n; ++i) q.logs_[i * r + j] = gapflow::branch_log(emb[i]);
  }

  const BigFloat two_pi = 2 * big_pi();
  q.gamma_ = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    BigComplex lam(-1, 0);
    for (std::size_t j = 0; j < r; ++j) lam = lam + scale(q.logs_[i * r + j], us.beta()[j]);
    q.flow_eig_.push_back(lam);
    const double re = to_double(lam.re);
    if (std::abs(re) <= options.tol_imag) {
      q.rotational_.push_back(i);
      q.theta_big_.push_back(lam.im / two_pi);
      q.theta_.push_back(to_double(lam.im / two_pi));
    } else if (re > 0) {
      throw FlowError("eigenvalue of L - I with positive real part " + std::to_string(re));
    } else {
      q.gamma_ = std::max(q.gamma_, re);
    }
  }
  if (q.rotational_.empty()) throw FlowError("no purely imaginary eigenvalue of L - I");
  if (options.alpha) {
    q.alpha_ = *options.alpha;
    if (!(q.alpha_ < 1) || !(q.alpha_ > std::exp(q.gamma_))) throw FlowError("alpha must satisfy e^gamma < alpha < 1");
  } else {
    q.alpha_ = std::isfinite(q.gamma_) ? std::exp(0.9 * q.gamma_) : 0.0;
  }

  for (std::size_t j = 0; j < r; ++j) {
    std::vector<BigComplex> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = q.logs_[i * r + j];
    q.L_.push_back(q.from_diagonal(diag));
  }
  {
    std::vector<BigComplex> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = q.flow_eig_[i] + BigComplex(1, 0);
    q.Lsum_ = q.from_diagonal(diag);
  }
  q.P_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n; ++c) q.P_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = to_cd(q.Q_[i][c]);
  for (Eigen::Index c = 0; c < q.P_.cols(); ++c) q.P_.col(c).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(q.P_);
  const auto& sv = svd.singularValues();
  q.cond_ = sv(0) / sv(sv.size() - 1);
  return q;
}

std::vector<std::complex<double>> QuasiFlow::eigenvalues() const {
  std::vector<std::complex<double>> out;
  for (const auto& z : flow_eig_) out.push_back(to_cd(z));
  return out;
}

Eigen::MatrixXcd QuasiFlow::from_diagonal(const std::vector<BigComplex>& diag) const {
  Eigen::MatrixXcd M(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b) {
      BigComplex s(0, 0);
      for (std::size_t i = 0; i < n_; ++i) s = s + Q_[a][i] * diag[i] * V_[i][b];
      M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = to_cd(s);
    }
  return M;
}

std::vector<BigComplex> QuasiFlow::g3_raw(const std::vector<BigFloat>& psi, const std::vector<BigFloat>& x) const {
  if (psi.size() != k() || x.size() != r_) throw FlowError("g3 argument sizes do not match (k, r)");
  const BigFloat two_pi = 2 * big_pi();
  std::vector<BigComplex> out(n_, BigComplex(0, 0));
  for (std::size_t kappa = 0; kappa < k(); ++kappa) {
    const std::size_t i = rotational_[kappa];
    BigComplex e(0, two_pi * psi[kappa]);
    for (std::size_t j = 0; j < r_; ++j) e = e - scale(logs_[i * r_ + j], x[j]);
    BigComplex c = big_exp(e) * V_[i][0];
    for (std::size_t a = 0; a < n_; ++a) out[a] = out[a] + Q_[a][i] * c;
  }
  return out;
}

std::vector<double> QuasiFlow::g3(const std::vector<double>& psi, const std::vector<double>& x) const {
  std::vector<BigFloat> p(psi.begin(), psi.end()), xx(x.begin(), x.end());
  std::vector<double> out;
  for (const auto& z : g3_raw(p, xx)) out.push_back(to_double(z.re));
  return out;
}

Eigen::MatrixXd QuasiFlow::g3_jacobian(const std::vector<double>& psi, const std::vector<double>& x) const {
  if (psi.size() != k() || x.size() != r_) throw FlowError("g3 argument sizes do not match (k, r)");
  const BigFloat two_pi = 2 * big_pi();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(k() + r_));
  for (std::size_t kappa = 0; kappa < k(); ++kappa) {
    const std::size_t i = rotational_[kappa];
    BigComplex e(0, two_pi * BigFloat(psi[kappa]));
    for (std::size_t j = 0; j < r_; ++j) e = e - scale(logs_[i * r_ + j], BigFloat(x[j]));
    BigComplex c = big_exp(e) * V_[i][0];
    for (std::size_t a = 0; a < n_; ++a) {
      BigComplex term = Q_[a][i] * c;
      J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(kappa)) += to_double((BigComplex(0, two_pi) * term).re);
      for (std::size_t j = 0; j < r_; ++j)
        J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k() + j)) -= to_double((logs_[i * r_ + j] * term).re);
    }
  }
  return J;
}

std::vector<double> Prediction::scaled() const {
  std::vector<double> out;
  for (double p : predicted) out.push_back(p * t.get_d());
  return out;
}

Prediction predict_expansion(const QuasiFlow& qf, const UnitSystem& us, const NumberField& field, const Rational& t) {
  Prediction pr;
  pr.t = t;
  const BigFloat lt = log_rational(t);
  std::vector<BigFloat> psi, x;
  for (const auto& th : qf.theta_big()) psi.push_back(th * lt);
  for (const auto& b : us.beta()) x.push_back(frac_part(b * lt));
  for (const auto& z : qf.g3_raw(psi, x)) {
    pr.predicted.push_back(to_double(z.re));
    pr.max_imag = std::max(pr.max_imag, std::abs(to_double(z.im)));
  }
  FieldElement u = unit_at(field, us, t);
  pr.exact = u.coords();
  const BigFloat tb = to_bigfloat(t);
  for (std::size_t a = 0; a < pr.predicted.size(); ++a) {
    BigFloat diff = to_bigfloat(pr.exact[a]) / tb - BigFloat(pr.predicted[a]);
    pr.error = std::max(pr.error, std::abs(to_double(diff)));
  }
  return pr;
}

FactorizationReport factorization_check(const QuasiFlow& qf, const UnitSystem& us, const NumberField& field,
                                        const Rational& t) {
  const std::size_t n = qf.dim(), r = qf.rank();
  const BigFloat lt = log_rational(t);
  std::vector<BigFloat> fr;
  for (const auto& b : us.beta()) fr.push_back(frac_part(b * lt));
  std::vector<BigComplex> da(n), du(n);
  for (std::size_t i = 0; i < n; ++i) {
    BigComplex e(0, 0);
    for (std::size_t j = 0; j < r; ++j) e = e - scale(qf.log_eigenvalue(i, j), fr[j]);
    da[i] = big_exp(e);
    du[i] = big_exp(scale(qf.flow_eigenvalue(i) + BigComplex(1, 0), lt));
  }
  FactorizationReport rep;
  rep.A = qf.from_diagonal(da);
  rep.Uhat = qf.from_diagonal(du);
  Eigen::MatrixXcd AU = rep.A * rep.Uhat;
  RationalMatrix U = field.mult_matrix(unit_at(field, us, t));
  Eigen::MatrixXcd Ud(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) Ud(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = U(a, b).get_d();
  rep.relative_residual = (Ud - AU).norm() / Ud.norm();
  rep.max_imag = AU.imag().cwiseAbs().maxCoeff();
  return rep;
}

GrowthReport growth_check(const NumberField& field, const UnitSystem& us, const std::vector<Rational>& grid) {
  const std::size_t n = field.degree();
  GrowthReport rep;
  rep.min_ratio.assign(n, std::numeric_limits<double>::infinity());
  rep.max_ratio.assign(n, 0);
  for (const auto& t : grid) {
    RationalMatrix U = field.mult_matrix(unit_at(field, us, t));
    std::vector<double> row;
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0;
      for (std::size_t a = 0; a < n; ++a) s += U(a, c).get_d() * U(a, c).get_d();
      double ratio = std::sqrt(s) / t.get_d();
      row.push_back(ratio);
      rep.min_ratio[c] = std::min(rep.min_ratio[c], ratio);
      rep.max_ratio[c] = std::max(rep.max_ratio[c], ratio);
    }
    rep.ratios.push_back(row);
  }
  return rep;
}

std::vector<Eigen::MatrixXcd> commuting_logs_generic(const std::vector<Eigen::MatrixXd>& E) {
  if (E.empty()) return {};
  const Eigen::Index n = E.front().rows();
  // A generic combination separates the joint eigenspaces.
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  double c = 1.0;
  for (const auto& m : E) {
    C += c * m;
    c = c * 0.6180339887498949 + 0.3819660112501051;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C.cast<std::complex<double>>());
  Eigen::MatrixXcd P = es.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 0) || sv(0) / sv(sv.size() - 1) > 1e10)
    throw FlowError("matrices are not simultaneously diagonalisable to working accuracy");
  Eigen::MatrixXcd Pinv = P.inverse();
  std::vector<Eigen::MatrixXcd> out;
  for (const auto& m : E) {
    Eigen::MatrixXcd D = Pinv * m.cast<std::complex<double>>() * P;
    Eigen::MatrixXcd off = D;
    off.diagonal().setZero();
    if (off.norm() > 1e-8 * std::max(1.0, m.norm())) throw FlowError("matrices do not commute or are defective");
    Eigen::VectorXcd logs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::complex<double> z = D(i, i);
      // Real eigenvalues come back with rounding noise in the imaginary part.
      if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) z = {z.real(), 0.0};
      logs(i) = branch_log(z);
    }
    out.push_back(P * logs.asDiagonal() * Pinv);
  }
  return out;
}

}  // namespace gapflow
