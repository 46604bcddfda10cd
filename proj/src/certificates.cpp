#include "fmcert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fmcert/chaos_sim.hpp"
#include "fmcert/constants.hpp"

namespace fmcert {

TargetSpec TargetSpec::single(OperatorMatrix t, int order) {
  TargetSpec s;
  s.Hdim = t.dim();
  s.orders.emplace(order, std::move(t));
  return s;
}

OperatorMatrix TargetSpec::aggregate() const {
  OperatorMatrix agg = OperatorMatrix::zero(Hdim);
  for (const auto& [r, op] : orders) agg.entries += op.entries;
  return agg;
}

double TargetSpec::total_trace() const {
  double acc = 0.0;
  for (const auto& [r, op] : orders) acc += trace(op);
  return acc;
}

const OperatorMatrix* TargetSpec::order(int r) const {
  auto it = orders.find(r);
  return it == orders.end() ? nullptr : &it->second;
}

void TargetSpec::validate() const {
  for (const auto& [r, op] : orders) {
    if (r < 1) throw std::invalid_argument("target order must be >= 1");
    if (op.dim() != Hdim) throw std::invalid_argument("target dimension mismatch");
    if (!op.is_symmetric(1e-10)) throw std::invalid_argument("target operator not symmetric");
    if (min_eigenvalue(op) < -1e-10)
      throw std::invalid_argument("target operator not positive semidefinite");
  }
}

nlohmann::json to_json(const TargetSpec& t) {
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& [r, op] : t.orders)
    orders.push_back({{"r", r}, {"op", to_json(op)}});
  return nlohmann::json{{"Hdim", t.Hdim}, {"orders", orders}};
}

TargetSpec target_from_json(const nlohmann::json& j) {
  if (j.contains("dim") && j.contains("entries"))
    return TargetSpec::single(operator_from_json(j));
  TargetSpec t;
  t.Hdim = j.at("Hdim").get<int>();
  for (const auto& item : j.at("orders")) {
    int r = item.at("r").get<int>();
    OperatorMatrix op = operator_from_json(item.at("op"));
    auto [it, fresh] = t.orders.emplace(r, std::move(op));
    if (!fresh) throw std::invalid_argument("duplicate target order");
  }
  t.validate();
  return t;
}

TargetSpec load_target(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return target_from_json(j);
}

void save_target(const TargetSpec& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(t).dump(2) << "\n";
}

nlohmann::json to_json(const CertificateReport& r) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& g : r.grid_table)
    table.push_back({{"N", g.N}, {"m", g.m}, {"R1", g.R1}, {"R2", g.R2},
                     {"R3", g.R3}, {"R4", g.R4}, {"R5", g.R5}, {"R6", g.R6},
                     {"bound", g.bound}});
  nlohmann::json j{{"R1", r.R1}, {"R2", r.R2}, {"R3", r.R3}, {"R4", r.R4},
                   {"R5", r.R5}, {"R6", r.R6}, {"N", r.N},   {"m", r.m},
                   {"bound", r.bound}, {"grid_table", table},
                   {"diagnostics", r.diagnostics}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

std::string grid_table_csv(const CertificateReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "N,m,R1,R2,R3,R4,R5,R6,bound\n";
  for (const auto& g : r.grid_table)
    out << g.N << ',' << g.m << ',' << g.R1 << ',' << g.R2 << ',' << g.R3 << ','
        << g.R4 << ',' << g.R5 << ',' << g.R6 << ',' << g.bound << '\n';
  return out.str();
}

double GammaTerms::total() const {
  double acc = 0.0;
  for (const auto& [l, v] : same_order) acc += v;
  for (const auto& [p, v] : cross_order) acc += v;
  return acc;
}

namespace {

// Precomputed per-order data reused across the (N, m) grid.
struct Context {
  int Hdim = 0;
  std::map<int, OperatorMatrix> order_cov;
  std::map<int, std::vector<double>> norm_sq;              // [i]
  std::map<int, std::vector<std::vector<double>>> contr;   // [i][depth-1]
  OperatorMatrix total_cov;
  double total_s1 = 0.0;

  explicit Context(const ChaosExpansion& f) : Hdim(f.Hdim) {
    total_cov = OperatorMatrix::zero(Hdim);
    for (const auto& [r, kern] : f.kernels) {
      OperatorMatrix cov = order_covariance(kern);
      total_cov.entries += cov.entries;
      order_cov.emplace(r, std::move(cov));
      std::vector<double> n2(Hdim);
      std::vector<std::vector<double>> c(Hdim);
      for (int i = 0; i < Hdim; ++i) {
        n2[i] = kernel_norm_sq(kern.components[i]);
        c[i].resize(std::max(0, r - 1));
        for (int depth = 1; depth <= r - 1; ++depth)
          c[i][depth - 1] =
              frobenius_norm(contract(kern.components[i], kern.components[i], depth));
      }
      norm_sq.emplace(r, std::move(n2));
      contr.emplace(r, std::move(c));
    }
    total_s1 = schatten_norm(total_cov, 1.0);
  }

  double order_norm_sq(int l, int i0) const {
    auto it = norm_sq.find(l);
    return it == norm_sq.end() ? 0.0 : it->second[i0];
  }
  double contraction(int l, int i0, int depth) const {
    auto it = contr.find(l);
    return it == contr.end() ? 0.0 : it->second[i0][depth - 1];
  }
  double cov_entry(int r, int i0, int j0) const {
    auto it = order_cov.find(r);
    return it == order_cov.end() ? 0.0 : it->second.entries(i0, j0);
  }

  double gamma_same(int l, int i0, int j0) const {
    double acc = 0.0;
    for (int chi = 1; chi <= l - 1; ++chi) {
      double c = constant_cp(l, chi);
      double a = contraction(l, i0, l - chi);
      double b = contraction(l, j0, l - chi);
      acc += c * c * (a * a + b * b);
    }
    return 0.5 * acc;
  }

  double gamma_cross(int l1, int l2, int i0, int j0) const {
    double acc = 0.0;
    // Indicator terms keep the contraction norm to the first power.
    if (l1 < l2)
      acc += constant_cpq(l1, l2) * order_norm_sq(l1, i0) * contraction(l2, j0, l2 - l1);
    if (l2 < l1)
      acc += constant_cpq(l2, l1) * order_norm_sq(l2, j0) * contraction(l1, i0, l1 - l2);
    int lo = std::min(l1, l2), hi = std::max(l1, l2);
    for (int chi = 1; chi <= lo - 1; ++chi) {
      double a = contraction(l1, i0, l1 - chi);
      double b = contraction(l2, j0, l2 - chi);
      acc += constant_cpqchi(lo, hi, chi) * (a * a + b * b);
    }
    return acc;
  }

  double gamma_block_sum(int m_cut, int N) const {
    double acc = 0.0;
    std::vector<int> orders;
    for (const auto& [r, n2] : norm_sq)
      if (r <= N) orders.push_back(r);
    for (int i0 = 0; i0 < m_cut; ++i0) {
      for (int j0 = 0; j0 < m_cut; ++j0) {
        for (int l : orders) acc += gamma_same(l, i0, j0);
        for (int l1 : orders)
          for (int l2 : orders)
            if (l1 != l2) acc += gamma_cross(l1, l2, i0, j0);
      }
    }
    return acc;
  }

  double diag_tail(int N, int m_cut) const {
    double acc = 0.0;
    for (const auto& [r, cov] : order_cov) {
      if (r > N) continue;
      for (int j0 = m_cut; j0 < Hdim; ++j0) acc += cov.entries(j0, j0);
    }
    return acc;
  }

  double order_tail(int N) const {
    double acc = 0.0;
    for (const auto& [r, n2] : norm_sq) {
      if (r <= N) continue;
      double rf = exact_factorial(r);
      for (double v : n2) acc += rf * v;
    }
    return acc;
  }
};

GridEntry evaluate_point(const Context& ctx, const TargetSpec& targets, int N,
                         int m_cut) {
  GridEntry g;
  g.N = N;
  g.m = m_cut;
  g.R1 = std::sqrt(ctx.order_tail(N));
  double r2 = 0.0;
  std::vector<int> r2_orders;
  for (const auto& [r, cov] : ctx.order_cov)
    if (r <= N) r2_orders.push_back(r);
  for (const auto& [r, op] : targets.orders)
    if (r <= N && ctx.order_cov.find(r) == ctx.order_cov.end()) r2_orders.push_back(r);
  for (int r : r2_orders) {
    Eigen::MatrixXd gap = Eigen::MatrixXd::Zero(ctx.Hdim, ctx.Hdim);
    if (auto it = ctx.order_cov.find(r); it != ctx.order_cov.end())
      gap += it->second.entries;
    if (const OperatorMatrix* t = targets.order(r)) gap -= t->entries;
    r2 += schatten_norm(OperatorMatrix{std::move(gap)}, 1.0);
  }
  g.R2 = 0.5 * r2;
  g.R3 = std::sqrt(static_cast<double>(m_cut)) * N *
         std::sqrt(ctx.gamma_block_sum(m_cut, N));
  double tail = ctx.diag_tail(N, m_cut);
  g.R4 = 0.5 * (N + 2) * tail;
  g.R5 = std::sqrt(ctx.total_s1) * std::sqrt((N + 3) * tail);
  double r6 = 0.0;
  for (const auto& [r, op] : targets.orders)
    if (r > N) r6 += trace(op);
  g.R6 = 0.5 * r6;
  g.bound = g.R1 + g.R2 + g.R3 + g.R4 + g.R5 + g.R6;
  return g;
}

void fill_from_entry(CertificateReport& rep, const GridEntry& g) {
  rep.R1 = g.R1;
  rep.R2 = g.R2;
  rep.R3 = g.R3;
  rep.R4 = g.R4;
  rep.R5 = g.R5;
  rep.R6 = g.R6;
  rep.N = g.N;
  rep.m = g.m;
  rep.bound = g.bound;
}

nlohmann::json context_diagnostics(const Context& ctx, const GridEntry& best) {
  nlohmann::json contr = nlohmann::json::object();
  for (const auto& [l, per_comp] : ctx.contr) {
    double mx = 0.0;
    for (const auto& row : per_comp)
      for (double v : row) mx = std::max(mx, v);
    contr[std::to_string(l)] = mx;
  }
  // Proof-level sharpening of R5: the head trace replaces the full S1 norm.
  double head = 0.0;
  for (int i0 = 0; i0 < std::min(best.m, ctx.Hdim); ++i0)
    head += ctx.total_cov.entries(i0, i0);
  double tail = ctx.diag_tail(best.N, best.m);
  double tight_r5 = std::sqrt(std::max(0.0, head)) * std::sqrt((best.N + 3) * tail);
  return nlohmann::json{{"total_cov_s1", ctx.total_s1},
                        {"contraction_max", contr},
                        {"diag_tail", tail},
                        {"order_tail", ctx.order_tail(best.N)},
                        {"tighter_R5", tight_r5}};
}

void check_dims(const ChaosExpansion& f, const TargetSpec& targets) {
  if (targets.Hdim != f.Hdim)
    throw std::invalid_argument("target and expansion dimensions differ");
}

}  // namespace

GammaTerms gamma_terms(const ChaosExpansion& f, int i, int j, int N) {
  if (i < 1 || i > f.Hdim || j < 1 || j > f.Hdim)
    throw std::invalid_argument("component index out of range");
  Context ctx(f);
  GammaTerms out;
  std::vector<int> orders;
  for (const auto& [r, kern] : f.kernels)
    if (r <= N) orders.push_back(r);
  for (int l : orders) out.same_order[l] = ctx.gamma_same(l, i - 1, j - 1);
  for (int l1 : orders)
    for (int l2 : orders)
      if (l1 != l2) out.cross_order[{l1, l2}] = ctx.gamma_cross(l1, l2, i - 1, j - 1);
  return out;
}

CertificateReport r_terms(const ChaosExpansion& f, const TargetSpec& targets,
                          int N, int m_cut) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (m_cut < 0 || m_cut > f.Hdim) throw std::invalid_argument("m_cut out of range");
  check_dims(f, targets);
  Context ctx(f);
  GridEntry g = evaluate_point(ctx, targets, N, m_cut);
  CertificateReport rep;
  fill_from_entry(rep, g);
  rep.grid_table.push_back(g);
  rep.diagnostics = context_diagnostics(ctx, g);
  return rep;
}

CertificateReport theorem35_bound(const ChaosExpansion& f, const TargetSpec& targets,
                                  const std::vector<int>& N_grid,
                                  const std::vector<int>& m_grid) {
  if (N_grid.empty() || m_grid.empty()) throw std::invalid_argument("empty grid");
  check_dims(f, targets);
  Context ctx(f);
  CertificateReport rep;
  const GridEntry* best = nullptr;
  for (int N : N_grid) {
    for (int m : m_grid) {
      if (N < 1) throw std::invalid_argument("N must be >= 1");
      if (m < 0 || m > f.Hdim) throw std::invalid_argument("m_cut out of range");
      rep.grid_table.push_back(evaluate_point(ctx, targets, N, m));
    }
  }
  for (const auto& g : rep.grid_table)
    if (!best || g.bound < best->bound) best = &g;
  fill_from_entry(rep, *best);
  rep.diagnostics = context_diagnostics(ctx, *best);
  return rep;
}

CertificateReport fixed_chaos_bound(const Kernel& f, const OperatorMatrix& t_z,
                                    const std::vector<int>& m_grid) {
  if (m_grid.empty()) throw std::invalid_argument("empty grid");
  if (!t_z.is_symmetric(1e-10) || min_eigenvalue(t_z) < -1e-10)
    throw std::invalid_argument("target operator must be symmetric PSD");
  if (t_z.dim() != f.Hdim) throw std::invalid_argument("target dimension mismatch");
  const int p = f.order;
  const int m_max = f.Hdim;

  OperatorMatrix cov = order_covariance(f);
  double r2 = 0.5 * schatten_norm(OperatorMatrix{cov.entries - t_z.entries}, 1.0);
  double s1 = schatten_norm(cov, 1.0);

  // Contraction norms straight from the kernel; this path deliberately does
  // not share the grid-search precomputation.
  std::vector<std::vector<double>> contr(m_max);
  for (int i = 0; i < m_max; ++i) {
    contr[i].resize(std::max(0, p - 1));
    for (int depth = 1; depth <= p - 1; ++depth)
      contr[i][depth - 1] =
          frobenius_norm(contract(f.components[i], f.components[i], depth));
  }
  auto gamma_same = [&](int i0, int j0) {
    double acc = 0.0;
    for (int chi = 1; chi <= p - 1; ++chi) {
      double c = constant_cp(p, chi);
      double a = contr[i0][p - chi - 1];
      double b = contr[j0][p - chi - 1];
      acc += c * c * (a * a + b * b);
    }
    return 0.5 * acc;
  };

  CertificateReport rep;
  for (int m : m_grid) {
    if (m < 0 || m > m_max) throw std::invalid_argument("m_cut out of range");
    GridEntry g;
    g.N = p;
    g.m = m;
    g.R2 = r2;
    double block = 0.0;
    for (int i0 = 0; i0 < m; ++i0)
      for (int j0 = 0; j0 < m; ++j0) block += gamma_same(i0, j0);
    g.R3 = std::sqrt(static_cast<double>(m)) * p * std::sqrt(block);
    double tail = 0.0;
    for (int j0 = m; j0 < m_max; ++j0) tail += cov.entries(j0, j0);
    g.R4 = 0.5 * (p + 2) * tail;
    g.R5 = std::sqrt(s1) * std::sqrt((p + 3) * tail);
    g.bound = g.R2 + g.R3 + g.R4 + g.R5;
    rep.grid_table.push_back(g);
  }
  const GridEntry* best = &rep.grid_table.front();
  for (const auto& g : rep.grid_table)
    if (g.bound < best->bound) best = &g;
  fill_from_entry(rep, *best);
  rep.diagnostics = nlohmann::json{{"order", p}, {"cov_s1", s1}};
  return rep;
}

double gaussian_pair_bound(const OperatorMatrix& t1, const OperatorMatrix& t2,
                           std::vector<std::string>* warnings) {
  for (const OperatorMatrix* t : {&t1, &t2}) {
    if (!t->is_symmetric(1e-10) || min_eigenvalue(*t) < -1e-10)
      throw std::invalid_argument("Gaussian target must be symmetric PSD");
  }
  if (min_eigenvalue(t1) <= 0.0 && min_eigenvalue(t2) <= 0.0 && warnings)
    warnings->push_back("neither Gaussian target is strictly positive definite");
  return 0.5 * schatten_norm(OperatorMatrix{t1.entries - t2.entries}, 1.0);
}

bool FmtConditionReport::all_ok() const {
  for (const auto& [r, ok] : trace_gap_ok)
    if (!ok) return false;
  for (const auto& [r, ok] : contraction_ok)
    if (!ok) return false;
  return true;
}

FmtConditionReport check_fmt_conditions(const ChaosExpansion& f,
                                        const TargetSpec& targets, double tol) {
  check_dims(f, targets);
  Context ctx(f);
  FmtConditionReport rep;
  rep.tol = tol;
  std::vector<int> orders;
  for (const auto& [r, cov] : ctx.order_cov) orders.push_back(r);
  for (const auto& [r, op] : targets.orders)
    if (ctx.order_cov.find(r) == ctx.order_cov.end()) orders.push_back(r);
  std::sort(orders.begin(), orders.end());
  for (int r : orders) {
    Eigen::MatrixXd gap = Eigen::MatrixXd::Zero(f.Hdim, f.Hdim);
    if (auto it = ctx.order_cov.find(r); it != ctx.order_cov.end())
      gap += it->second.entries;
    if (const OperatorMatrix* t = targets.order(r)) gap -= t->entries;
    double g = schatten_norm(OperatorMatrix{std::move(gap)}, 1.0);
    rep.trace_gap[r] = g;
    rep.trace_gap_ok[r] = g <= tol;
  }
  for (const auto& [l, per_comp] : ctx.contr) {
    double mx = 0.0;
    for (const auto& row : per_comp)
      for (double v : row) mx = std::max(mx, v);
    rep.contraction_max[l] = mx;
    rep.contraction_ok[l] = mx <= tol;
  }
  int max_order = f.max_order();
  for (int n = 0; n <= max_order; ++n) rep.order_tail[n] = ctx.order_tail(n);
  return rep;
}

nlohmann::json to_json(const FmtConditionReport& r) {
  auto pack = [](const auto& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
  };
  return nlohmann::json{{"tol", r.tol},
                        {"trace_gap", pack(r.trace_gap)},
                        {"trace_gap_ok", pack(r.trace_gap_ok)},
                        {"contraction_max", pack(r.contraction_max)},
                        {"contraction_ok", pack(r.contraction_ok)},
                        {"order_tail", pack(r.order_tail)},
                        {"all_ok", r.all_ok()}};
}

ChaosExpansion flatten_vector_chaos(
    const std::vector<std::pair<int, Kernel>>& components) {
  if (components.empty()) throw std::invalid_argument("no components to flatten");
  const int hdim = components.front().second.hdim;
  const int m = components.front().second.Hdim;
  const int K = static_cast<int>(components.size());
  ChaosExpansion out = ChaosExpansion::empty(hdim, m * K);
  for (int k = 0; k < K; ++k) {
    const auto& [r, kern] = components[k];
    if (kern.hdim != hdim || kern.Hdim != m)
      throw std::invalid_argument("mismatched truncations in flatten");
    if (r != kern.order) throw std::invalid_argument("component order mismatch");
    auto it = out.kernels.find(r);
    if (it == out.kernels.end())
      it = out.kernels.emplace(r, Kernel::zero(r, hdim, m * K)).first;
    for (int i = 0; i < m; ++i) {
      ScalarKernel& dst = it->second.components[k * m + i];
      dst = add(dst, kern.components[i]);
    }
  }
  return out;
}

}  // namespace fmcert
