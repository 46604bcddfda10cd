#pragma once

#include <Eigen/Dense>
#include <string>

#include <json.hpp>

namespace fmcert {

/// Dense matrix representation of a bounded operator on the truncated
/// Hilbert space: entries(i, j) = <T e_j, e_i>.
struct OperatorMatrix {
  Eigen::MatrixXd entries;

  OperatorMatrix() = default;
  explicit OperatorMatrix(Eigen::MatrixXd m) : entries(std::move(m)) {}

  static OperatorMatrix zero(int dim) {
    return OperatorMatrix{Eigen::MatrixXd::Zero(dim, dim)};
  }
  static OperatorMatrix identity(int dim) {
    return OperatorMatrix{Eigen::MatrixXd::Identity(dim, dim)};
  }
  /// Rank-one projector e_i (x) e_i, 1-based index.
  static OperatorMatrix basis_projector(int dim, int i);

  int dim() const { return static_cast<int>(entries.rows()); }
  bool is_finite() const { return entries.allFinite(); }
  bool is_symmetric(double tol = 1e-12) const;
};

/// Singular values, descending. Computed from the symmetric
/// eigendecomposition of A^T A with eigenvalues floored at zero.
Eigen::VectorXd singular_values(const OperatorMatrix& a);

/// Schatten p-norm (sum_i s_i^p)^{1/p}; p = infinity gives the operator norm.
double schatten_norm(const OperatorMatrix& a, double p);

/// Algebraic trace sum_i entries(i, i).
double trace(const OperatorMatrix& a);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const OperatorMatrix& a);

/// The four pieces P_m A P_m, Q_m A P_m, P_m A Q_m, Q_m A Q_m; they sum to A.
struct BlockDecomposition {
  OperatorMatrix pp, qp, pq, qq;
};
BlockDecomposition block_decompose(const OperatorMatrix& a, int m);

/// sqrt(r) * ||A||_{S2}, an upper bound on ||A||_{S1} valid when rank(A) <= r.
/// Throws if the numerical rank of A exceeds r (singular value tolerance 1e-8).
double finite_rank_s1_bound(const OperatorMatrix& a, int r);

nlohmann::json to_json(const OperatorMatrix& a);
OperatorMatrix operator_from_json(const nlohmann::json& j);
OperatorMatrix load_operator(const std::string& path);
void save_operator(const OperatorMatrix& a, const std::string& path);

}  // namespace fmcert
