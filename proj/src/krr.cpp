#include "fmcert/krr.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fmcert/chaos_sim.hpp"
#include "fmcert/constants.hpp"

namespace fmcert {

Eigen::VectorXd MercerSpec::phi(double x) const {
  const int m = rank();
  Eigen::VectorXd out(m);
  if (phi_family == "fourier") {
    for (int j = 1; j <= m; ++j) {
      if (j == 1) {
        out(0) = 1.0;
      } else if (j % 2 == 0) {
        out(j - 1) = std::numbers::sqrt2 * std::cos(2.0 * std::numbers::pi * (j / 2) * x);
      } else {
        out(j - 1) = std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * (j / 2) * x);
      }
    }
  } else if (phi_family == "poly") {
    double v = 1.0;
    for (int j = 0; j < m; ++j) {
      out(j) = v;
      v *= x;
    }
  } else {
    throw std::invalid_argument("unknown phi family: " + phi_family);
  }
  return out;
}

Eigen::VectorXd MercerSpec::feature(double x) const {
  Eigen::VectorXd f = phi(x);
  for (int j = 0; j < rank(); ++j) f(j) *= std::sqrt(mu[j]);
  return f;
}

double MercerSpec::k(double x, double y) const {
  return feature(x).dot(feature(y));
}

void MercerSpec::validate() const {
  if (mu.empty()) throw std::invalid_argument("empty Mercer spectrum");
  for (double m : mu)
    if (m <= 0.0) throw std::invalid_argument("Mercer eigenvalues must be positive");
  if (phi_family != "fourier" && phi_family != "poly")
    throw std::invalid_argument("unknown phi family: " + phi_family);
}

KRRSetup KRRSetup::make(std::vector<double> design, MercerSpec mercer,
                        double lambda, int p, double sigma2) {
  mercer.validate();
  if (design.empty()) throw std::invalid_argument("empty design");
  if (lambda <= 0.0) throw std::invalid_argument("ridge parameter must be positive");
  if (p < 1) throw std::invalid_argument("chaos order must be >= 1");
  if (sigma2 < 0.0) throw std::invalid_argument("noise variance must be >= 0");
  KRRSetup s;
  s.design = std::move(design);
  s.mercer = std::move(mercer);
  s.lambda = lambda;
  s.p = p;
  s.sigma2 = sigma2;
  const int grid = 2048;
  double c = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double x = static_cast<double>(i) / grid;
    c = std::max(c, s.mercer.feature(x).squaredNorm());
  }
  s.C_k = c;
  return s;
}

std::vector<double> equispaced_design(int n) {
  std::vector<double> x(n);
  for (int i = 1; i <= n; ++i) x[i - 1] = (i - 0.5) / n;
  return x;
}

OperatorMatrix empirical_cov(const KRRSetup& setup) {
  const int m = setup.mercer.rank();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  for (double x : setup.design) {
    Eigen::VectorXd f = setup.mercer.feature(x);
    g += f * f.transpose();
  }
  return OperatorMatrix{g / setup.n()};
}

OperatorMatrix resolvent(const OperatorMatrix& g, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("ridge parameter must be positive");
  if (!g.is_symmetric(1e-10) || min_eigenvalue(g) < -1e-10)
    throw std::invalid_argument("resolvent input must be symmetric PSD");
  const int m = g.dim();
  Eigen::MatrixXd shifted = g.entries + lambda * Eigen::MatrixXd::Identity(m, m);
  return OperatorMatrix{shifted.ldlt().solve(Eigen::MatrixXd::Identity(m, m))};
}

OperatorMatrix fn_covariance(const KRRSetup& setup) {
  OperatorMatrix gn = empirical_cov(setup);
  OperatorMatrix an = resolvent(gn, setup.lambda);
  return OperatorMatrix{setup.sigma2 * an.entries * gn.entries * an.entries};
}

OperatorMatrix limit_covariance(const OperatorMatrix& gamma, double lambda,
                                double sigma2) {
  OperatorMatrix a0 = resolvent(gamma, lambda);
  return OperatorMatrix{sigma2 * a0.entries * gamma.entries * a0.entries};
}

CovGapBound cov_gap_bound(const KRRSetup& setup, const OperatorMatrix& gamma_limit) {
  CovGapBound out;
  OperatorMatrix gn = empirical_cov(setup);
  OperatorMatrix an = resolvent(gn, setup.lambda);
  OperatorMatrix a0 = resolvent(gamma_limit, setup.lambda);
  const double l = setup.lambda;

  out.gamma_gap_s1 =
      schatten_norm(OperatorMatrix{gn.entries - gamma_limit.entries}, 1.0);
  out.resolvent_gap = schatten_norm(
      OperatorMatrix{an.entries - a0.entries}, std::numeric_limits<double>::infinity());
  out.resolvent_bound = out.gamma_gap_s1 / (l * l);

  double g_s1 = schatten_norm(gamma_limit, 1.0);
  out.certified = (setup.C_k / l + g_s1 / l) * out.resolvent_bound +
                  (1.0 / (l * l)) * out.gamma_gap_s1;
  out.direct = schatten_norm(
      OperatorMatrix{fn_covariance(setup).entries -
                     limit_covariance(gamma_limit, l, setup.sigma2).entries},
      1.0);
  return out;
}

Eigen::MatrixXd chaos_alphas(const KRRSetup& setup) {
  OperatorMatrix an = resolvent(empirical_cov(setup), setup.lambda);
  const int m = setup.mercer.rank();
  const int n = setup.n();
  Eigen::MatrixXd alpha(m, n);
  for (int i = 0; i < n; ++i)
    alpha.col(i) = an.entries * setup.mercer.feature(setup.design[i]) / std::sqrt(n);
  return alpha;
}

Kernel build_chaos_kernel(const KRRSetup& setup) {
  const int m = setup.mercer.rank();
  const int n = setup.n();
  const int p = setup.p;
  Eigen::MatrixXd alpha = chaos_alphas(setup);
  // g_i = sqrt(sigma^2/p!) u_i^{(x)p}, u_i = (1/sqrt(p)) sum of the p fresh
  // coordinates of block i; expand the power over sorted multisets of the
  // block coordinates.
  Kernel kern = Kernel::zero(p, n * p, m);
  double g_scale = std::sqrt(setup.sigma2 / exact_factorial(p)) *
                   std::pow(p, -0.5 * p);
  std::vector<int> counts(p, 0);
  // enumerate multisets of size p from p block coordinates
  std::vector<IndexTuple> multisets;
  IndexTuple cur;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      multisets.push_back(cur);
      return;
    }
    for (int c = start; c < p; ++c) {
      cur.push_back(c);
      rec(c, left - 1);
      cur.pop_back();
    }
  };
  rec(0, p);
  for (int i = 0; i < n; ++i) {
    const int base = i * p;  // block i occupies coordinates base+1 .. base+p
    for (const auto& ms : multisets) {
      IndexTuple idx(p);
      for (int t = 0; t < p; ++t) idx[t] = base + ms[t] + 1;
      double v = g_scale;
      for (int j = 0; j < m; ++j) {
        double coeff = alpha(j, i) * v;
        if (coeff != 0.0) kern.component(j + 1).add(idx, coeff);
      }
    }
  }
  return kern;
}

KrrCertificate krr_clt_certificate(const KRRSetup& setup,
                                   const OperatorMatrix& gamma_limit,
                                   const std::vector<int>& m_grid) {
  KrrCertificate out;
  Kernel kern = build_chaos_kernel(setup);
  OperatorMatrix t_z = limit_covariance(gamma_limit, setup.lambda, setup.sigma2);
  out.report = fixed_chaos_bound(kern, t_z, m_grid);
  out.gap = cov_gap_bound(setup, gamma_limit);
  auto profile = contraction_profile(kern);
  for (const auto& [key, norm] : profile)
    out.contraction_sum_max = std::max(out.contraction_sum_max, norm * norm);
  double s_over_pf = setup.sigma2 / exact_factorial(setup.p);
  out.contraction_bound = s_over_pf * s_over_pf * setup.C_k * setup.C_k /
                          (setup.n() * std::pow(setup.lambda, 4));
  out.report.diagnostics["cov_gap_certified"] = out.gap.certified;
  out.report.diagnostics["cov_gap_direct"] = out.gap.direct;
  out.report.diagnostics["contraction_sum_max"] = out.contraction_sum_max;
  out.report.diagnostics["contraction_bound"] = out.contraction_bound;
  return out;
}

Eigen::VectorXd krr_estimate_eigen(const KRRSetup& setup,
                                   const std::vector<double>& y) {
  if (y.size() != setup.design.size())
    throw std::invalid_argument("response length mismatch");
  OperatorMatrix an = resolvent(empirical_cov(setup), setup.lambda);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(setup.mercer.rank());
  for (int i = 0; i < setup.n(); ++i)
    rhs += y[i] * setup.mercer.feature(setup.design[i]);
  return an.entries * rhs / setup.n();
}

Eigen::VectorXd krr_estimate_representer(const KRRSetup& setup,
                                         const std::vector<double>& y) {
  if (y.size() != setup.design.size())
    throw std::invalid_argument("response length mismatch");
  const int n = setup.n();
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = setup.mercer.k(setup.design[i], setup.design[j]);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd c =
      (gram + n * setup.lambda * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(yv);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(setup.mercer.rank());
  for (int i = 0; i < n; ++i) f += c(i) * setup.mercer.feature(setup.design[i]);
  return f;
}

}  // namespace fmcert
