#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gapflow/number_field.hpp"
#include "gapflow/unit_flow.hpp"

namespace gapflow {

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowOptions {
  /// |Re| below this classifies an eigenvalue of L - I as rotational.
  double tol_imag = 1e-8;
  /// Decay base; defaults to exp(0.9 gamma).
  std::optional<double> alpha;
};

/// Commuting logarithms L_j of the multiplication matrices E_j, the flow
/// matrix L = sum_j beta_j L_j and the spectral data of L - I.
///
/// Multiplication matrices of a field are simultaneously diagonalised by
/// Q = V^{-1}, V_{ij} = sigma_i(basis_j) over all d+1 complex embeddings
/// (reals first, then each conjugate pair), so L_j = Q diag(Log sigma_i(e_j)) V
/// with Log the principal branch extended by log|x| + i pi on negative reals.
/// Spectral quantities are held at BigFloat precision; matrices are exposed
/// in complex double.
class QuasiFlow {
 public:
  static QuasiFlow make(const NumberField& field, const UnitSystem& us, const FlowOptions& options = {});

  std::size_t dim() const { return n_; }
  std::size_t rank() const { return r_; }
  const std::vector<RationalMatrix>& E() const { return E_; }
  const std::vector<Eigen::MatrixXcd>& L_matrices() const { return L_; }
  const Eigen::MatrixXcd& L() const { return Lsum_; }
  /// Eigenvector matrix of L - I with unit-norm columns.
  const Eigen::MatrixXcd& P() const { return P_; }
  double condition_number() const { return cond_; }
  /// Eigenvalues of L - I in embedding order.
  std::vector<std::complex<double>> eigenvalues() const;
  /// Embedding indices of the rotational eigenvalues, in order.
  const std::vector<std::size_t>& rotational() const { return rotational_; }
  std::size_t k() const { return rotational_.size(); }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<BigFloat>& theta_big() const { return theta_big_; }
  const BigComplex& flow_eigenvalue(std::size_t i) const { return flow_eig_[i]; }
  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }
  /// Eigenvalue of E_j at embedding i: Log sigma_i(e_j).
  const BigComplex& log_eigenvalue(std::size_t i, std::size_t j) const { return logs_[i * r_ + j]; }

  /// Expression inside Re(...) of g3, before taking the real part.
  std::vector<BigComplex> g3_raw(const std::vector<BigFloat>& psi, const std::vector<BigFloat>& x) const;
  std::vector<double> g3(const std::vector<double>& psi, const std::vector<double>& x) const;
  /// Columns: d/dpsi_1..d/dpsi_k, then d/dx_1..d/dx_r.
  Eigen::MatrixXd g3_jacobian(const std::vector<double>& psi, const std::vector<double>& x) const;

  /// Q diag(f(i)) V, for the diagonalised functional calculus.
  Eigen::MatrixXcd from_diagonal(const std::vector<BigComplex>& diag) const;

 private:
  std::size_t n_ = 0, r_ = 0;
  std::vector<RationalMatrix> E_;
  std::vector<std::vector<BigComplex>> V_, Q_;
  std::vector<BigComplex> logs_;     // n_ x r_
  std::vector<BigComplex> flow_eig_; // eigenvalues of L - I
  std::vector<Eigen::MatrixXcd> L_;
  Eigen::MatrixXcd Lsum_, P_;
  double cond_ = 0;
  std::vector<std::size_t> rotational_;
  std::vector<double> theta_;
  std::vector<BigFloat> theta_big_;
  double gamma_ = 0, alpha_ = 0;
};

struct Prediction {
  Rational t;
  std::vector<double> predicted;  // g3(theta log t, {beta log t})
  std::vector<Rational> exact;    // n(u_1(t))
  double error = 0;               // || n / t - predicted ||_inf
  double max_imag = 0;            // largest |Im| of the raw g3 expression
  std::vector<double> scaled() const;  // t * predicted
};

Prediction predict_expansion(const QuasiFlow& qf, const UnitSystem& us, const NumberField& field, const Rational& t);

struct FactorizationReport {
  double relative_residual = 0;  // ||U - A Uhat|| / ||U||
  double max_imag = 0;           // largest |Im| entry of A Uhat
  Eigen::MatrixXcd A, Uhat;
};

/// U(t) = A(t) Uhat(t) with A = exp(-sum {beta_j log t} L_j) and
/// Uhat = exp(log t L), both through the diagonalisation.
FactorizationReport factorization_check(const QuasiFlow& qf, const UnitSystem& us, const NumberField& field,
                                        const Rational& t);

struct GrowthReport {
  std::vector<double> min_ratio, max_ratio;  // per basis vector over the grid
  std::vector<std::vector<double>> ratios;   // [t index][basis vector]
};

/// |U(t) e_i| / t across the grid.
GrowthReport growth_check(const NumberField& field, const UnitSystem& us, const std::vector<Rational>& grid);

/// Logarithm with log|x| + i pi on the negative real axis.
std::complex<double> branch_log(std::complex<double> z);

/// Simultaneous diagonalisation of commuting diagonalisable matrices not
/// known to come from a field. Throws FlowError if they cannot be
/// diagonalised together to working accuracy.
std::vector<Eigen::MatrixXcd> commuting_logs_generic(const std::vector<Eigen::MatrixXd>& E);

}  // namespace gapflow
