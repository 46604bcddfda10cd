#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// Probabilists' Hermite polynomial He_k(x).
double hermite_he(int k, double x);

/// One draw of the first hdim isonormal coordinates: iid standard normals.
Eigen::VectorXd sample_isonormal(int hdim, std::mt19937_64& rng);

/// Exact pathwise value of the multiple integral I_p(f) at a realization xi,
/// via the Hermite product rule over sorted index tuples.
double eval_multiple_integral(const ScalarKernel& f, const Eigen::VectorXd& xi);

/// F(xi) as a vector in the truncated target space, components 1..Hdim.
Eigen::VectorXd eval_expansion(const ChaosExpansion& f, const Eigen::VectorXd& xi);

/// Covariance operator of I_r(f_r): (i, j) -> r! <f_{r,i}, f_{r,j}>.
OperatorMatrix order_covariance(const Kernel& f);

/// Exact covariance of the full expansion: sum over orders of r! Gram terms.
OperatorMatrix exact_covariance(const ChaosExpansion& f);

/// E F^4 - 3 (E F^2)^2 for the scalar variable F = I_p(f), computed from
/// contraction norms. Zero when p = 1.
double exact_fourth_excess(const ScalarKernel& f);

/// Precompiled evaluation plan for a chaos expansion, used in MC loops.
/// Rows of the derivative matrices are h-coordinates, columns H-components.
class ExpansionEvaluator {
 public:
  explicit ExpansionEvaluator(const ChaosExpansion& f);

  int hdim() const { return hdim_; }
  int Hdim() const { return Hdim_; }

  Eigen::VectorXd value(const Eigen::VectorXd& xi) const;
  /// d_f = D F(xi), d_l = D(-L^{-1} F)(xi); the two differ only in the
  /// per-order weight (r versus 1).
  void derivatives(const Eigen::VectorXd& xi, Eigen::MatrixXd& d_f,
                   Eigen::MatrixXd& d_l) const;
  /// Gamma(F, -L^{-1} F)(xi) = (D F)^T D(-L^{-1} F), an Hdim x Hdim matrix.
  Eigen::MatrixXd gamma(const Eigen::VectorXd& xi) const;

 private:
  struct Term {
    double coeff;  // permutation count times stored value
    int order;
    std::vector<std::pair<int, int>> factors;  // (0-based index, multiplicity)
  };
  struct SliceTerm {
    int row;  // 0-based h-coordinate
    int col;  // 0-based H-component
    Term term;
  };

  void hermite_table(const Eigen::VectorXd& xi, Eigen::MatrixXd& he) const;
  static double term_value(const Term& t, const Eigen::MatrixXd& he);

  int hdim_ = 0;
  int Hdim_ = 0;
  int max_degree_ = 0;
  std::vector<std::vector<Term>> value_terms_;  // per component
  std::vector<SliceTerm> slice_terms_;
};

/// Pathwise Malliavin derivative D F(xi) for one realization.
Eigen::MatrixXd malliavin_derivative_eval(const ChaosExpansion& f,
                                          const Eigen::VectorXd& xi);

/// Gamma(F, G)(xi) = (D F)^T (D G) for two expansions on the same truncated
/// space; Gamma(F, G) = Gamma(G, F)^T holds exactly.
Eigen::MatrixXd gamma_matrix(const ChaosExpansion& f, const ChaosExpansion& g,
                             const Eigen::VectorXd& xi);

}  // namespace fmcert
