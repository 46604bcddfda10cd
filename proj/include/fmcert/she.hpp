#pragma once

#include <random>
#include <string>
#include <vector>

#include "fmcert/certificates.hpp"
#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// Spectral model of the stochastic heat equation on (0,1) with Dirichlet
/// boundary: eigenvalues lambda_k = (k pi)^2, diagonal noise Q e_k = q_k e_k,
/// truncated at K modes.
struct HeatModel {
  /// "power": q_k = k^{-beta}, beta > 1. "geometric": q_k = beta^k, beta in (0,1).
  std::string q_family = "power";
  double beta = 2.0;
  int K = 0;

  double q(int k) const;       // 1-based mode index
  double lambda(int k) const;  // (k pi)^2
  void validate() const;
  /// Closed-form upper bound on sum_{k>K} q_k / (4 lambda_k).
  double analytic_tail() const;
};

/// Diagonal covariance of u(t) from zero initial condition:
/// entries q_k / (2 lambda_k) (1 - e^{-2 lambda_k t}).
OperatorMatrix covariance_at_time(const HeatModel& model, double t);

/// covariance_at_time with modes k > n zeroed (P_n T P_n).
OperatorMatrix galerkin_covariance(const HeatModel& model, int n, double t);

struct WeakErrorBound {
  double bound = 0.0;          // truncated_sum + remainder
  double truncated_sum = 0.0;  // (1/4) sum_{n < k <= K} (q_k/lambda_k)(1 - e^{-2 lambda_k T})
  double remainder = 0.0;      // analytic tail beyond K (zero when T = 0)
};

/// Certified upper bound on the spectral Galerkin weak error at time T.
WeakErrorBound weak_error_bound(const HeatModel& model, int n, double T);

/// Diagonal invariant covariance q_k / (2 lambda_k).
OperatorMatrix invariant_covariance(const HeatModel& model);

/// Heat semigroup applied to the expansion: H-component i of every order
/// scales by e^{-lambda_i t}.
ChaosExpansion evolve_expansion(const HeatModel& model, const ChaosExpansion& f0,
                                double t);

/// Chaos expansion of u(t) started at F0: the evolved expansion plus an
/// independent order-1 stochastic-convolution block on fresh base coordinates.
ChaosExpansion solution_expansion(const HeatModel& model, const ChaosExpansion& f0,
                                  double t);

/// Certificate for d2(u(t), invariant law): theorem35_bound of the solution
/// expansion against the single order-1 invariant target.
CertificateReport invariant_gap_certificate(const HeatModel& model,
                                            const ChaosExpansion& f0, double t,
                                            const std::vector<int>& N_grid,
                                            const std::vector<int>& m_grid);

/// Exact draw of the first n Galerkin modes of u(t) (zeros beyond n);
/// independent centered Gaussians, no time-stepping.
Eigen::VectorXd simulate_modes(const HeatModel& model, int n, double t,
                               std::mt19937_64& rng);

}  // namespace fmcert
