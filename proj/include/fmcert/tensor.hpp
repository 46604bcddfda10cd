#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fmcert {

using IndexTuple = std::vector<int>;  // 1-based basis indices

/// p! / prod(multiplicities!): the number of distinct orderings of a tuple.
double permutation_count(const IndexTuple& sorted_tuple);

/// All distinct orderings of a multiset (small tuples only).
std::vector<IndexTuple> distinct_arrangements(const IndexTuple& sorted_tuple);

/// A raw (not necessarily symmetric) order-p coefficient tensor, stored by
/// ordered index tuple.
struct RawTensor {
  int order = 0;
  int dim = 0;
  std::map<IndexTuple, double> values;

  void add(const IndexTuple& idx, double v);
};

/// Fully symmetric order-p kernel on the truncated isonormal space, stored
/// sparsely by sorted index tuple. The stored value is the common coefficient
/// of every ordering of the tuple.
struct ScalarKernel {
  int order = 0;
  int dim = 0;
  std::map<IndexTuple, double> coeffs;

  static ScalarKernel zero(int order, int dim) { return {order, dim, {}}; }

  void add(const IndexTuple& idx, double v);  // idx is sorted internally
  double at(const IndexTuple& idx) const;     // 0 if absent
  bool empty() const { return coeffs.empty(); }
};

/// Symmetrize a raw tensor: coeffs(t) = (1/p!) sum_{sigma} raw(sigma(t)).
/// With strict = true, inputs whose asymmetry exceeds 1e-9 are rejected.
ScalarKernel symmetrize(const RawTensor& raw, bool strict = false);

double kernel_norm_sq(const ScalarKernel& f);
double kernel_norm(const ScalarKernel& f);
double kernel_dot(const ScalarKernel& f, const ScalarKernel& g);
ScalarKernel scale(const ScalarKernel& f, double c);
ScalarKernel add(const ScalarKernel& f, const ScalarKernel& g);

/// Result of contracting the last r slots of f against the first r slots of
/// g. Symmetric within its left block (p - r slots) and within its right
/// block (q - r slots), but not across; stored by the pair of sorted blocks.
struct ContractionTensor {
  int left_order = 0;
  int right_order = 0;
  int dim = 0;
  std::map<std::pair<IndexTuple, IndexTuple>, double> values;

  double scalar() const;  // defined when both block orders are 0
};

ContractionTensor contract(const ScalarKernel& f, const ScalarKernel& g, int r);

double frobenius_norm_sq(const ContractionTensor& t);
double frobenius_norm(const ContractionTensor& t);
double frobenius_dot(const ContractionTensor& s, const ContractionTensor& t);

/// Average over all orderings of the concatenated tuple; yields the
/// symmetric tensorization of the contraction.
ScalarKernel symmetrize(const ContractionTensor& t);

/// An H-valued symmetric kernel: one ScalarKernel per H-basis component.
struct Kernel {
  int order = 0;
  int hdim = 0;
  int Hdim = 0;
  std::vector<ScalarKernel> components;  // size Hdim

  static Kernel zero(int order, int hdim, int Hdim);
  const ScalarKernel& component(int i) const;  // 1-based
  ScalarKernel& component(int i);
  double norm_sq() const;  // sum of component norms squared (Parseval)
};

/// ||f_i (x)_r f_i|| for every component i and contraction depth r in
/// 1..p-1; empty for order-1 kernels.
std::map<std::pair<int, int>, double> contraction_profile(const Kernel& f);

/// Finite chaos expansion F = sum_r I_r(f_r), all kernels sharing (hdim, Hdim).
struct ChaosExpansion {
  int hdim = 0;
  int Hdim = 0;
  std::map<int, Kernel> kernels;  // chaos order -> kernel

  static ChaosExpansion empty(int hdim, int Hdim) { return {hdim, Hdim, {}}; }
  void set_kernel(Kernel k);
  const Kernel* kernel(int order) const;  // nullptr if absent
  int max_order() const;
  ChaosExpansion single_order(int r) const;
};

nlohmann::json to_json(const Kernel& k);
Kernel kernel_from_json(const nlohmann::json& j, bool strict = false);
nlohmann::json to_json(const ChaosExpansion& f);
ChaosExpansion expansion_from_json(const nlohmann::json& j, bool strict = false);
ChaosExpansion load_expansion(const std::string& path);
void save_expansion(const ChaosExpansion& f, const std::string& path);

}  // namespace fmcert
