#include "fmcert/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fmcert {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_indices(const IndexTuple& idx, int order, int dim) {
  if (static_cast<int>(idx.size()) != order)
    throw std::invalid_argument("index tuple length does not match tensor order");
  for (int j : idx)
    if (j < 1 || j > dim) throw std::invalid_argument("basis index out of range");
}

// Distinct sub-multisets of size r, together with the complement.
void enumerate_splits(const IndexTuple& sorted_tuple, int r,
                      std::vector<std::pair<IndexTuple, IndexTuple>>& out) {
  // distinct values with multiplicities
  std::vector<std::pair<int, int>> vals;
  for (int j : sorted_tuple) {
    if (!vals.empty() && vals.back().first == j)
      ++vals.back().second;
    else
      vals.emplace_back(j, 1);
  }
  std::vector<int> counts(vals.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (left == 0) {
      IndexTuple sub, rest;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        for (int c = 0; c < counts[k]; ++c) sub.push_back(vals[k].first);
        for (int c = counts[k]; c < vals[k].second; ++c) rest.push_back(vals[k].first);
      }
      out.emplace_back(std::move(sub), std::move(rest));
      return;
    }
    if (pos == vals.size()) return;
    int maxc = std::min(left, vals[pos].second);
    for (int c = 0; c <= maxc; ++c) {
      counts[pos] = c;
      rec(pos + 1, left - c);
    }
    counts[pos] = 0;
  };
  rec(0, r);
}

}  // namespace

double permutation_count(const IndexTuple& sorted_tuple) {
  double num = factorial(static_cast<int>(sorted_tuple.size()));
  double den = 1.0;
  int run = 1;
  for (std::size_t i = 1; i < sorted_tuple.size(); ++i) {
    if (sorted_tuple[i] == sorted_tuple[i - 1])
      ++run;
    else {
      den *= factorial(run);
      run = 1;
    }
  }
  den *= factorial(run);
  return num / den;
}

std::vector<IndexTuple> distinct_arrangements(const IndexTuple& sorted_tuple) {
  std::vector<IndexTuple> out;
  IndexTuple t = sorted_tuple;
  std::sort(t.begin(), t.end());
  do {
    out.push_back(t);
  } while (std::next_permutation(t.begin(), t.end()));
  return out;
}

void RawTensor::add(const IndexTuple& idx, double v) {
  check_indices(idx, order, dim);
  values[idx] += v;
}

void ScalarKernel::add(const IndexTuple& idx, double v) {
  check_indices(idx, order, dim);
  IndexTuple key = idx;
  std::sort(key.begin(), key.end());
  coeffs[key] += v;
}

double ScalarKernel::at(const IndexTuple& idx) const {
  IndexTuple key = idx;
  std::sort(key.begin(), key.end());
  auto it = coeffs.find(key);
  return it == coeffs.end() ? 0.0 : it->second;
}

ScalarKernel symmetrize(const RawTensor& raw, bool strict) {
  ScalarKernel out{raw.order, raw.dim, {}};
  std::set<IndexTuple> seen;
  for (const auto& [idx, v] : raw.values) {
    (void)v;
    IndexTuple key = idx;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    double sum = 0.0;
    int count = 0;
    for (const auto& w : distinct_arrangements(key)) {
      auto it = raw.values.find(w);
      sum += (it == raw.values.end()) ? 0.0 : it->second;
      ++count;
    }
    double avg = sum / count;
    if (strict) {
      for (const auto& w : distinct_arrangements(key)) {
        auto it = raw.values.find(w);
        double val = (it == raw.values.end()) ? 0.0 : it->second;
        if (std::abs(val - avg) > 1e-9)
          throw std::invalid_argument("tensor asymmetry exceeds strict tolerance");
      }
    }
    if (avg != 0.0) out.coeffs[key] = avg;
  }
  return out;
}

double kernel_norm_sq(const ScalarKernel& f) {
  double acc = 0.0;
  for (const auto& [idx, v] : f.coeffs) acc += permutation_count(idx) * v * v;
  return acc;
}

double kernel_norm(const ScalarKernel& f) { return std::sqrt(kernel_norm_sq(f)); }

double kernel_dot(const ScalarKernel& f, const ScalarKernel& g) {
  if (f.order != g.order) throw std::invalid_argument("kernel order mismatch");
  const auto& small = f.coeffs.size() <= g.coeffs.size() ? f : g;
  const auto& large = f.coeffs.size() <= g.coeffs.size() ? g : f;
  double acc = 0.0;
  for (const auto& [idx, v] : small.coeffs) {
    auto it = large.coeffs.find(idx);
    if (it != large.coeffs.end()) acc += permutation_count(idx) * v * it->second;
  }
  return acc;
}

ScalarKernel scale(const ScalarKernel& f, double c) {
  ScalarKernel out = f;
  for (auto& [idx, v] : out.coeffs) v *= c;
  return out;
}

ScalarKernel add(const ScalarKernel& f, const ScalarKernel& g) {
  if (f.order != g.order || f.dim != g.dim)
    throw std::invalid_argument("kernel shape mismatch");
  ScalarKernel out = f;
  for (const auto& [idx, v] : g.coeffs) out.coeffs[idx] += v;
  return out;
}

double ContractionTensor::scalar() const {
  if (left_order != 0 || right_order != 0)
    throw std::logic_error("contraction tensor is not fully contracted");
  if (values.empty()) return 0.0;
  return values.begin()->second;
}

ContractionTensor contract(const ScalarKernel& f, const ScalarKernel& g, int r) {
  if (f.dim != g.dim) throw std::invalid_argument("kernel dimension mismatch");
  if (r < 0 || r > std::min(f.order, g.order))
    throw std::invalid_argument("contraction depth out of range");
  ContractionTensor out{f.order - r, g.order - r, f.dim, {}};

  // group support by the contracted sub-multiset
  using Slices = std::map<IndexTuple, std::vector<std::pair<IndexTuple, double>>>;
  auto slice_map = [&](const ScalarKernel& k) {
    Slices s;
    std::vector<std::pair<IndexTuple, IndexTuple>> splits;
    for (const auto& [idx, v] : k.coeffs) {
      splits.clear();
      enumerate_splits(idx, r, splits);
      for (auto& [sub, rest] : splits) s[sub].emplace_back(rest, v);
    }
    return s;
  };
  Slices fs = slice_map(f);
  Slices gs = slice_map(g);
  for (const auto& [kappa, fents] : fs) {
    auto it = gs.find(kappa);
    if (it == gs.end()) continue;
    double w = permutation_count(kappa);
    for (const auto& [a, vf] : fents)
      for (const auto& [b, vg] : it->second) out.values[{a, b}] += w * vf * vg;
  }
  return out;
}

double frobenius_norm_sq(const ContractionTensor& t) {
  double acc = 0.0;
  for (const auto& [key, v] : t.values)
    acc += permutation_count(key.first) * permutation_count(key.second) * v * v;
  return acc;
}

double frobenius_norm(const ContractionTensor& t) {
  return std::sqrt(frobenius_norm_sq(t));
}

double frobenius_dot(const ContractionTensor& s, const ContractionTensor& t) {
  if (s.left_order != t.left_order || s.right_order != t.right_order)
    throw std::invalid_argument("contraction tensor shape mismatch");
  const auto& small = s.values.size() <= t.values.size() ? s : t;
  const auto& large = s.values.size() <= t.values.size() ? t : s;
  double acc = 0.0;
  for (const auto& [key, v] : small.values) {
    auto it = large.values.find(key);
    if (it != large.values.end())
      acc += permutation_count(key.first) * permutation_count(key.second) * v * it->second;
  }
  return acc;
}

ScalarKernel symmetrize(const ContractionTensor& t) {
  const int s = t.left_order + t.right_order;
  ScalarKernel out{s, t.dim, {}};
  std::set<IndexTuple> support;
  for (const auto& [key, v] : t.values) {
    (void)v;
    IndexTuple full = key.first;
    full.insert(full.end(), key.second.begin(), key.second.end());
    std::sort(full.begin(), full.end());
    support.insert(std::move(full));
  }
  for (const auto& mu : support) {
    double sum = 0.0;
    int count = 0;
    for (const auto& w : distinct_arrangements(mu)) {
      IndexTuple a(w.begin(), w.begin() + t.left_order);
      IndexTuple b(w.begin() + t.left_order, w.end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      auto it = t.values.find({a, b});
      sum += (it == t.values.end()) ? 0.0 : it->second;
      ++count;
    }
    double avg = sum / count;
    if (avg != 0.0) out.coeffs[mu] = avg;
  }
  return out;
}

Kernel Kernel::zero(int order, int hdim, int Hdim) {
  Kernel k{order, hdim, Hdim, {}};
  k.components.assign(Hdim, ScalarKernel::zero(order, hdim));
  return k;
}

const ScalarKernel& Kernel::component(int i) const {
  if (i < 1 || i > Hdim) throw std::invalid_argument("component index out of range");
  return components[i - 1];
}

ScalarKernel& Kernel::component(int i) {
  if (i < 1 || i > Hdim) throw std::invalid_argument("component index out of range");
  return components[i - 1];
}

double Kernel::norm_sq() const {
  double acc = 0.0;
  for (const auto& c : components) acc += kernel_norm_sq(c);
  return acc;
}

std::map<std::pair<int, int>, double> contraction_profile(const Kernel& f) {
  std::map<std::pair<int, int>, double> out;
  if (f.order < 2) return out;
  for (int i = 1; i <= f.Hdim; ++i) {
    const auto& fi = f.component(i);
    for (int r = 1; r <= f.order - 1; ++r)
      out[{i, r}] = frobenius_norm(contract(fi, fi, r));
  }
  return out;
}

void ChaosExpansion::set_kernel(Kernel k) {
  if (k.hdim != hdim || k.Hdim != Hdim)
    throw std::invalid_argument("kernel truncation mismatch");
  if (k.order < 1) throw std::invalid_argument("chaos order must be positive");
  kernels[k.order] = std::move(k);
}

const Kernel* ChaosExpansion::kernel(int order) const {
  auto it = kernels.find(order);
  return it == kernels.end() ? nullptr : &it->second;
}

int ChaosExpansion::max_order() const {
  return kernels.empty() ? 0 : kernels.rbegin()->first;
}

ChaosExpansion ChaosExpansion::single_order(int r) const {
  ChaosExpansion out = ChaosExpansion::empty(hdim, Hdim);
  if (const Kernel* k = kernel(r)) out.kernels[r] = *k;
  return out;
}

nlohmann::json to_json(const Kernel& k) {
  nlohmann::json coeffs = nlohmann::json::array();
  // entries are raw tensor positions, so write every arrangement of each
  // sorted tuple; the reader averages them back to the symmetric coefficient
  for (int i = 1; i <= k.Hdim; ++i)
    for (const auto& [idx, v] : k.component(i).coeffs)
      for (const auto& arr : distinct_arrangements(idx))
        coeffs.push_back({i, arr, v});
  return nlohmann::json{
      {"p", k.order}, {"hdim", k.hdim}, {"Hdim", k.Hdim}, {"coeffs", coeffs}};
}

Kernel kernel_from_json(const nlohmann::json& j, bool strict) {
  const int p = j.at("p").get<int>();
  const int hdim = j.at("hdim").get<int>();
  const int Hdim = j.at("Hdim").get<int>();
  if (p < 1 || hdim < 1 || Hdim < 1)
    throw std::invalid_argument("kernel header fields must be positive");
  std::vector<RawTensor> raws(Hdim, RawTensor{p, hdim, {}});
  for (const auto& entry : j.at("coeffs")) {
    const int i = entry.at(0).get<int>();
    if (i < 1 || i > Hdim) throw std::invalid_argument("component index out of range");
    raws[i - 1].add(entry.at(1).get<IndexTuple>(), entry.at(2).get<double>());
  }
  Kernel k = Kernel::zero(p, hdim, Hdim);
  for (int i = 1; i <= Hdim; ++i) k.component(i) = symmetrize(raws[i - 1], strict);
  return k;
}

nlohmann::json to_json(const ChaosExpansion& f) {
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& [r, k] : f.kernels) {
    (void)r;
    orders.push_back(to_json(k));
  }
  return nlohmann::json{{"hdim", f.hdim}, {"Hdim", f.Hdim}, {"orders", orders}};
}

ChaosExpansion expansion_from_json(const nlohmann::json& j, bool strict) {
  ChaosExpansion f =
      ChaosExpansion::empty(j.at("hdim").get<int>(), j.at("Hdim").get<int>());
  for (const auto& kj : j.at("orders")) f.set_kernel(kernel_from_json(kj, strict));
  return f;
}

ChaosExpansion load_expansion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return expansion_from_json(j);
}

void save_expansion(const ChaosExpansion& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(f).dump(2) << "\n";
}

}  // namespace fmcert
