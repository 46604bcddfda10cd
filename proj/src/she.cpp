#include "fmcert/she.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fmcert/chaos_sim.hpp"

namespace fmcert {

namespace {
constexpr double kPiSq = std::numbers::pi * std::numbers::pi;
}

double HeatModel::q(int k) const {
  if (q_family == "power") return std::pow(k, -beta);
  if (q_family == "geometric") return std::pow(beta, k);
  throw std::invalid_argument("unknown q family: " + q_family);
}

double HeatModel::lambda(int k) const { return kPiSq * k * k; }

void HeatModel::validate() const {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (q_family == "power") {
    if (beta <= 1.0) throw std::invalid_argument("power family needs beta > 1");
  } else if (q_family == "geometric") {
    if (beta <= 0.0 || beta >= 1.0)
      throw std::invalid_argument("geometric family needs beta in (0,1)");
  } else {
    throw std::invalid_argument("unknown q family: " + q_family);
  }
}

double HeatModel::analytic_tail() const {
  validate();
  if (q_family == "power") {
    // sum_{k>K} k^{-beta-2}/(4 pi^2) <= K^{-beta-1}/((beta+1) 4 pi^2)
    return std::pow(K, -beta - 1.0) / ((beta + 1.0) * 4.0 * kPiSq);
  }
  // sum_{k>K} beta^k/(4 pi^2 k^2) <= beta^{K+1} / (4 pi^2 (K+1)^2 (1-beta))
  double kk = static_cast<double>(K + 1);
  return std::pow(beta, K + 1) / (4.0 * kPiSq * kk * kk * (1.0 - beta));
}

OperatorMatrix covariance_at_time(const HeatModel& model, double t) {
  model.validate();
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(model.K, model.K);
  for (int k = 1; k <= model.K; ++k)
    m(k - 1, k - 1) =
        model.q(k) / (2.0 * model.lambda(k)) * (1.0 - std::exp(-2.0 * model.lambda(k) * t));
  return OperatorMatrix{std::move(m)};
}

OperatorMatrix galerkin_covariance(const HeatModel& model, int n, double t) {
  if (n < 0 || n > model.K) throw std::invalid_argument("mode count out of range");
  OperatorMatrix full = covariance_at_time(model, t);
  for (int k = n; k < model.K; ++k) full.entries(k, k) = 0.0;
  return full;
}

WeakErrorBound weak_error_bound(const HeatModel& model, int n, double T) {
  model.validate();
  if (n < 0 || T < 0.0) throw std::invalid_argument("invalid n or T");
  WeakErrorBound out;
  for (int k = n + 1; k <= model.K; ++k)
    out.truncated_sum += 0.25 * model.q(k) / model.lambda(k) *
                         (1.0 - std::exp(-2.0 * model.lambda(k) * T));
  out.remainder = (T == 0.0) ? 0.0 : model.analytic_tail();
  out.bound = out.truncated_sum + out.remainder;
  return out;
}

OperatorMatrix invariant_covariance(const HeatModel& model) {
  model.validate();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(model.K, model.K);
  for (int k = 1; k <= model.K; ++k)
    m(k - 1, k - 1) = model.q(k) / (2.0 * model.lambda(k));
  return OperatorMatrix{std::move(m)};
}

ChaosExpansion evolve_expansion(const HeatModel& model, const ChaosExpansion& f0,
                                double t) {
  model.validate();
  if (f0.Hdim > model.K) throw std::invalid_argument("expansion exceeds mode truncation");
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  ChaosExpansion out = f0;
  for (auto& [r, kern] : out.kernels)
    for (int i = 1; i <= out.Hdim; ++i)
      kern.component(i) = scale(kern.component(i), std::exp(-model.lambda(i) * t));
  return out;
}

ChaosExpansion solution_expansion(const HeatModel& model, const ChaosExpansion& f0,
                                  double t) {
  ChaosExpansion evolved = evolve_expansion(model, f0, t);
  const int K = model.K;
  const int hdim0 = evolved.hdim;
  ChaosExpansion out = ChaosExpansion::empty(hdim0 + K, K);
  for (const auto& [r, kern] : evolved.kernels) {
    Kernel k = Kernel::zero(r, hdim0 + K, K);
    for (int i = 1; i <= evolved.Hdim; ++i)
      for (const auto& [tuple, v] : kern.components[i - 1].coeffs)
        k.component(i).add(tuple, v);
    out.set_kernel(std::move(k));
  }
  // Stochastic convolution: one fresh Gaussian coordinate per mode.
  auto it = out.kernels.find(1);
  if (it == out.kernels.end())
    it = out.kernels.emplace(1, Kernel::zero(1, hdim0 + K, K)).first;
  for (int k = 1; k <= K; ++k) {
    double var = model.q(k) / (2.0 * model.lambda(k)) *
                 (1.0 - std::exp(-2.0 * model.lambda(k) * t));
    it->second.component(k).add({hdim0 + k}, std::sqrt(var));
  }
  return out;
}

CertificateReport invariant_gap_certificate(const HeatModel& model,
                                            const ChaosExpansion& f0, double t,
                                            const std::vector<int>& N_grid,
                                            const std::vector<int>& m_grid) {
  ChaosExpansion u = solution_expansion(model, f0, t);
  TargetSpec target = TargetSpec::single(invariant_covariance(model), 1);
  return theorem35_bound(u, target, N_grid, m_grid);
}

Eigen::VectorXd simulate_modes(const HeatModel& model, int n, double t,
                               std::mt19937_64& rng) {
  model.validate();
  if (n < 0 || n > model.K) throw std::invalid_argument("mode count out of range");
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(model.K);
  for (int k = 1; k <= n; ++k) {
    double var = model.q(k) / (2.0 * model.lambda(k)) *
                 (1.0 - std::exp(-2.0 * model.lambda(k) * t));
    u(k - 1) = std::sqrt(var) * gauss(rng);
  }
  return u;
}

}  // namespace fmcert
