#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmcert/certificates.hpp"
#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// Finite-rank Mercer kernel k(x,y) = sum_j mu_j phi_j(x) phi_j(y) on [0,1].
/// phi families: "fourier" (1, sqrt2 cos(2 pi k x), sqrt2 sin(2 pi k x)) or
/// "poly" (x^{j-1}).
struct MercerSpec {
  std::vector<double> mu;
  std::string phi_family = "fourier";

  int rank() const { return static_cast<int>(mu.size()); }
  Eigen::VectorXd phi(double x) const;
  /// K_x in eigencoordinates: entries sqrt(mu_j) phi_j(x).
  Eigen::VectorXd feature(double x) const;
  double k(double x, double y) const;
  void validate() const;
};

struct KRRSetup {
  std::vector<double> design;
  MercerSpec mercer;
  double lambda = 0.0;
  int p = 2;          // chaos order of the noise
  double sigma2 = 1.0;
  double C_k = 0.0;   // sup_x k(x,x), computed on a grid over [0,1]

  static KRRSetup make(std::vector<double> design, MercerSpec mercer,
                       double lambda, int p, double sigma2);
  int n() const { return static_cast<int>(design.size()); }
};

/// Equispaced design x_i = (i - 1/2)/n on [0,1].
std::vector<double> equispaced_design(int n);

/// Gamma_n[a,b] = (1/n) sum_i sqrt(mu_a mu_b) phi_a(x_i) phi_b(x_i).
OperatorMatrix empirical_cov(const KRRSetup& setup);

/// (G + lambda I)^{-1}; operator norm <= 1/lambda for PSD G.
OperatorMatrix resolvent(const OperatorMatrix& g, double lambda);

/// sigma^2 A_n Gamma_n A_n.
OperatorMatrix fn_covariance(const KRRSetup& setup);

/// sigma^2 (Gamma + lambda I)^{-1} Gamma (Gamma + lambda I)^{-1}.
OperatorMatrix limit_covariance(const OperatorMatrix& gamma, double lambda,
                                double sigma2);

struct CovGapBound {
  double certified = 0.0;      // explicit constant bound (before sigma^2)
  double direct = 0.0;         // ||sigma^2 A_n G_n A_n - sigma^2 A_0 G A_0||_S1
  double resolvent_gap = 0.0;  // computed ||A_n - A_0||_op
  double resolvent_bound = 0.0;  // lambda^{-2} ||G_n - G||_S1
  double gamma_gap_s1 = 0.0;
};

/// Certified covariance gap with the sups instantiated by 1/lambda and C_k;
/// guarantees direct <= sigma^2 * certified + 1e-10.
CovGapBound cov_gap_bound(const KRRSetup& setup, const OperatorMatrix& gamma_limit);

/// Order-p kernel of F_n: f = sum_i g_i (x) a_{n,i} with a_{n,i} =
/// A_n K_{x_i}/sqrt(n) and g_i = sqrt(sigma^2/p!) u_i^{(x)p} on p fresh
/// disjoint base coordinates per design point (hdim = n*p).
Kernel build_chaos_kernel(const KRRSetup& setup);

/// Coefficient matrix alpha[j][i] = (A_n K_{x_i})_j / sqrt(n).
Eigen::MatrixXd chaos_alphas(const KRRSetup& setup);

struct KrrCertificate {
  CertificateReport report;
  CovGapBound gap;
  double contraction_sum_max = 0.0;  // max_j max_r ||f_j (x)_r f_j||^2
  double contraction_bound = 0.0;    // (sigma^2/p!)^2 C_k^2 / (n lambda^4)
};

/// fixed_chaos_bound of the built kernel against the limit covariance.
KrrCertificate krr_clt_certificate(const KRRSetup& setup,
                                   const OperatorMatrix& gamma_limit,
                                   const std::vector<int>& m_grid);

/// Ridge estimate in Mercer eigencoordinates: A_n (1/n) sum_i y_i K_{x_i}.
Eigen::VectorXd krr_estimate_eigen(const KRRSetup& setup,
                                   const std::vector<double>& y);

/// Same estimate via the n x n kernel-matrix (representer) route.
Eigen::VectorXd krr_estimate_representer(const KRRSetup& setup,
                                         const std::vector<double>& y);

}  // namespace fmcert
