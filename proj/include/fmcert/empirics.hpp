#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmcert/chaos_sim.hpp"
#include "fmcert/mc.hpp"
#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// Dictionary of admissible d2 test functions h_{a,b}(x) =
/// cos(<x,a> + b) / (1 + |a| + |a|^2); each satisfies
/// sup|h| + sup|Dh| + sup|D^2h| <= 1.
struct TestFunctionDictionary {
  struct Entry {
    Eigen::VectorXd a;
    double b = 0.0;
  };
  std::vector<Entry> entries;
  std::string normalization = "cos/(1+|a|+|a|^2)";

  /// Default dictionary: directions rho * v for rho in {0.25, 0.5, 1, 2},
  /// v over the m basis vectors plus 16 seeded random unit vectors, phases
  /// {0, pi/2}.
  static TestFunctionDictionary standard(int m, std::uint64_t seed);

  int size() const { return static_cast<int>(entries.size()); }
  double amplitude(int entry) const;  // 1 / (1 + |a| + |a|^2)
  double eval(int entry, const Eigen::VectorXd& x) const;
  /// E h(Z) for Z ~ N(0, cov): A * exp(-a' cov a / 2) * cos(b).
  double gaussian_mean(int entry, const OperatorMatrix& cov) const;
  /// sup|h| + sup|Dh| + sup|D^2h| for one entry; always <= 1.
  double admissibility_budget(int entry) const;
};

struct D2Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int argmax_entry = -1;
  int dictionary_size = 0;
};

/// max over the dictionary of |mean h(F) - mean h(Z)|; a certified lower
/// bound on d2 up to statistical error. Samples are one row per draw.
D2Estimate d2_lower_bound(const Eigen::MatrixXd& samples_f,
                          const Eigen::MatrixXd& samples_z,
                          const TestFunctionDictionary& dict);

/// Draws from the chaos expansion, one row per sample.
Eigen::MatrixXd sample_expansion_matrix(const ChaosExpansion& f,
                                        std::uint64_t n_samples,
                                        std::uint64_t seed, int shards);

/// Gaussian draws with the given covariance via spectral factorization
/// (eigenvalue floor 0), one row per sample.
Eigen::MatrixXd sample_gaussian_matrix(const OperatorMatrix& cov,
                                       std::uint64_t n_samples,
                                       std::uint64_t seed, int shards);

/// MC estimate of (1/2) E || Gamma(F, -L^{-1}F) - T_Z ||_S1.
McReport mc_stein_gap(const ChaosExpansion& f, const OperatorMatrix& t_z,
                      std::uint64_t n_samples, std::uint64_t seed,
                      int shards = 8);

struct MomentReport {
  std::uint64_t n_samples = 0;
  Eigen::VectorXd second, second_se;
  Eigen::VectorXd fourth, fourth_se;
  Eigen::MatrixXd covariance;
};

/// Sample second/fourth coordinate moments and covariance of eval_expansion.
MomentReport mc_moments(const ChaosExpansion& f, std::uint64_t n_samples,
                        std::uint64_t seed, int shards = 8);

/// 15-term alternating polarization of a quartic form R(u) = E<X,u>^4:
/// M4(x1..x4) = (1/4!) sum_{r=1}^4 (-1)^{4-r} sum_{|S|=r} R(sum_{j in S} x_j).
double polarized_weak_moment(const std::function<double(const Eigen::VectorXd&)>& quartic,
                             const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                             const Eigen::VectorXd& x3, const Eigen::VectorXd& x4);

}  // namespace fmcert
