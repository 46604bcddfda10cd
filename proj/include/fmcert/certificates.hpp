#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// Per-order Gaussian targets T_{Z_r}; the aggregate target is their sum.
struct TargetSpec {
  int Hdim = 0;
  std::map<int, OperatorMatrix> orders;

  static TargetSpec single(OperatorMatrix t, int order = 1);

  OperatorMatrix aggregate() const;
  double total_trace() const;
  const OperatorMatrix* order(int r) const;  // nullptr if absent
  /// Symmetry and eigenvalues >= -1e-10 per order; throws on violation.
  void validate() const;
};

nlohmann::json to_json(const TargetSpec& t);
/// Accepts either {"Hdim", "orders": [{"r", "op"}...]} or a bare operator
/// JSON, which is read as the single order-1 target.
TargetSpec target_from_json(const nlohmann::json& j);
TargetSpec load_target(const std::string& path);
void save_target(const TargetSpec& t, const std::string& path);

struct GridEntry {
  int N = 0;
  int m = 0;
  double R1 = 0, R2 = 0, R3 = 0, R4 = 0, R5 = 0, R6 = 0;
  double bound = 0;
};

struct CertificateReport {
  double R1 = 0, R2 = 0, R3 = 0, R4 = 0, R5 = 0, R6 = 0;
  int N = 0;
  int m = 0;
  double bound = 0;
  std::vector<GridEntry> grid_table;
  nlohmann::json diagnostics;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const CertificateReport& r);
std::string grid_table_csv(const CertificateReport& r);

/// Same-order and cross-order gamma terms for the component pair (i, j),
/// 1-based, over orders up to N.
struct GammaTerms {
  std::map<int, double> same_order;                  // l -> gamma^(l)
  std::map<std::pair<int, int>, double> cross_order; // (l1, l2) -> gamma^(l1,l2)
  double total() const;
};
GammaTerms gamma_terms(const ChaosExpansion& f, int i, int j, int N);

/// All six remainder terms at one grid point (N, m_cut); bound is their sum.
CertificateReport r_terms(const ChaosExpansion& f, const TargetSpec& targets,
                          int N, int m_cut);

/// Grid search over the Cartesian product of the two grids; returns the
/// minimizing point together with the full grid table.
CertificateReport theorem35_bound(const ChaosExpansion& f, const TargetSpec& targets,
                                  const std::vector<int>& N_grid,
                                  const std::vector<int>& m_grid);

/// Simplified single-order certificate for F = I_p(f): no order tail, no
/// cross-order terms. Implemented as its own code path; agrees with
/// theorem35_bound on the one-order expansion at every grid point.
CertificateReport fixed_chaos_bound(const Kernel& f, const OperatorMatrix& t_z,
                                    const std::vector<int>& m_grid);

/// d2(Z1, Z2) <= (1/2) ||T1 - T2||_S1 for Gaussian targets. When neither
/// input is strictly positive definite a warning is appended to *warnings.
double gaussian_pair_bound(const OperatorMatrix& t1, const OperatorMatrix& t2,
                           std::vector<std::string>* warnings = nullptr);

/// Finite-n magnitudes of the CLT conditions: per-order trace-class gaps,
/// contraction maxima, and order tails, each flagged against tol.
struct FmtConditionReport {
  std::map<int, double> trace_gap;          // order -> S1 gap to target
  std::map<int, double> contraction_max;    // order -> max_i,r ||f_i (x)_r f_i||
  std::map<int, double> order_tail;         // N -> sum_{r>N} sum_i r! ||f_ri||^2
  std::map<int, bool> trace_gap_ok;
  std::map<int, bool> contraction_ok;
  double tol = 0;
  bool all_ok() const;
};
FmtConditionReport check_fmt_conditions(const ChaosExpansion& f,
                                        const TargetSpec& targets, double tol);
nlohmann::json to_json(const FmtConditionReport& r);

/// Stack K scalar-space components of (possibly equal) orders into one
/// expansion on a space of dimension m*K; component (i, k) sits at position
/// (k-1)*m + i.
ChaosExpansion flatten_vector_chaos(const std::vector<std::pair<int, Kernel>>& components);

}  // namespace fmcert
