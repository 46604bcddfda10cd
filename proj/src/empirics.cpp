#include "fmcert/empirics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fmcert/constants.hpp"

namespace fmcert {

TestFunctionDictionary TestFunctionDictionary::standard(int m, std::uint64_t seed) {
  TestFunctionDictionary dict;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    v(i) = 1.0;
    dirs.push_back(std::move(v));
  }
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 16; ++i) {
    Eigen::VectorXd v(m);
    do {
      for (int k = 0; k < m; ++k) v(k) = gauss(rng);
    } while (v.norm() < 1e-12);
    dirs.push_back(v / v.norm());
  }
  const double rhos[] = {0.25, 0.5, 1.0, 2.0};
  const double phases[] = {0.0, std::numbers::pi / 2};
  for (double rho : rhos)
    for (const auto& v : dirs)
      for (double b : phases) dict.entries.push_back({rho * v, b});
  return dict;
}

double TestFunctionDictionary::amplitude(int entry) const {
  double na = entries[entry].a.norm();
  return 1.0 / (1.0 + na + na * na);
}

double TestFunctionDictionary::eval(int entry, const Eigen::VectorXd& x) const {
  const Entry& e = entries[entry];
  return amplitude(entry) * std::cos(e.a.dot(x) + e.b);
}

double TestFunctionDictionary::gaussian_mean(int entry, const OperatorMatrix& cov) const {
  const Entry& e = entries[entry];
  double q = e.a.dot(cov.entries * e.a);
  return amplitude(entry) * std::exp(-0.5 * q) * std::cos(e.b);
}

double TestFunctionDictionary::admissibility_budget(int entry) const {
  double na = entries[entry].a.norm();
  return amplitude(entry) * (1.0 + na + na * na);
}

D2Estimate d2_lower_bound(const Eigen::MatrixXd& samples_f,
                          const Eigen::MatrixXd& samples_z,
                          const TestFunctionDictionary& dict) {
  if (samples_f.rows() == 0 || samples_z.rows() == 0)
    throw std::invalid_argument("empty sample set");
  if (dict.entries.empty()) throw std::invalid_argument("empty dictionary");
  D2Estimate best;
  best.dictionary_size = dict.size();
  for (int e = 0; e < dict.size(); ++e) {
    MeanAccumulator af, az;
    for (Eigen::Index s = 0; s < samples_f.rows(); ++s)
      af.add(dict.eval(e, samples_f.row(s)));
    for (Eigen::Index s = 0; s < samples_z.rows(); ++s)
      az.add(dict.eval(e, samples_z.row(s)));
    double gap = std::abs(af.mean() - az.mean());
    if (gap > best.value) {
      best.value = gap;
      best.stderr_ = std::sqrt(af.stderr_of_mean() * af.stderr_of_mean() +
                               az.stderr_of_mean() * az.stderr_of_mean());
      best.argmax_entry = e;
    }
  }
  if (best.argmax_entry < 0) {
    // all gaps zero: report the first entry's error bar
    MeanAccumulator af, az;
    for (Eigen::Index s = 0; s < samples_f.rows(); ++s)
      af.add(dict.eval(0, samples_f.row(s)));
    for (Eigen::Index s = 0; s < samples_z.rows(); ++s)
      az.add(dict.eval(0, samples_z.row(s)));
    best.stderr_ = std::sqrt(af.stderr_of_mean() * af.stderr_of_mean() +
                             az.stderr_of_mean() * az.stderr_of_mean());
    best.argmax_entry = 0;
  }
  return best;
}

Eigen::MatrixXd sample_expansion_matrix(const ChaosExpansion& f,
                                        std::uint64_t n_samples,
                                        std::uint64_t seed, int shards) {
  ExpansionEvaluator eval(f);
  struct Shard {
    Eigen::MatrixXd block;
  };
  auto results = run_sharded<Shard>(
      n_samples, shards, seed,
      [&](std::mt19937_64& rng, std::uint64_t n, int) {
        Shard out;
        out.block.resize(static_cast<Eigen::Index>(n), f.Hdim);
        for (std::uint64_t s = 0; s < n; ++s) {
          Eigen::VectorXd xi = sample_isonormal(f.hdim, rng);
          out.block.row(static_cast<Eigen::Index>(s)) = eval.value(xi);
        }
        return out;
      });
  Eigen::MatrixXd all(static_cast<Eigen::Index>(n_samples), f.Hdim);
  Eigen::Index row = 0;
  for (const auto& r : results) {
    all.middleRows(row, r.block.rows()) = r.block;
    row += r.block.rows();
  }
  return all;
}

Eigen::MatrixXd sample_gaussian_matrix(const OperatorMatrix& cov,
                                       std::uint64_t n_samples,
                                       std::uint64_t seed, int shards) {
  if (!cov.is_symmetric(1e-10))
    throw std::invalid_argument("covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.entries);
  Eigen::MatrixXd factor =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const int m = cov.dim();
  struct Shard {
    Eigen::MatrixXd block;
  };
  auto results = run_sharded<Shard>(
      n_samples, shards, seed,
      [&](std::mt19937_64& rng, std::uint64_t n, int) {
        Shard out;
        out.block.resize(static_cast<Eigen::Index>(n), m);
        for (std::uint64_t s = 0; s < n; ++s)
          out.block.row(static_cast<Eigen::Index>(s)) =
              (factor * sample_isonormal(m, rng)).transpose();
        return out;
      });
  Eigen::MatrixXd all(static_cast<Eigen::Index>(n_samples), m);
  Eigen::Index row = 0;
  for (const auto& r : results) {
    all.middleRows(row, r.block.rows()) = r.block;
    row += r.block.rows();
  }
  return all;
}

McReport mc_stein_gap(const ChaosExpansion& f, const OperatorMatrix& t_z,
                      std::uint64_t n_samples, std::uint64_t seed, int shards) {
  if (t_z.dim() != f.Hdim) throw std::invalid_argument("target dimension mismatch");
  ExpansionEvaluator eval(f);
  auto results = run_sharded<MeanAccumulator>(
      n_samples, shards, seed,
      [&](std::mt19937_64& rng, std::uint64_t n, int) {
        MeanAccumulator acc;
        for (std::uint64_t s = 0; s < n; ++s) {
          Eigen::VectorXd xi = sample_isonormal(f.hdim, rng);
          Eigen::MatrixXd gap = eval.gamma(xi) - t_z.entries;
          acc.add(0.5 * schatten_norm(OperatorMatrix{std::move(gap)}, 1.0));
        }
        return acc;
      });
  MeanAccumulator total;
  for (const auto& r : results) total.merge(r);
  McReport rep;
  rep.estimator = "stein_gap";
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.shards = shards;
  rep.value = total.mean();
  rep.stderr_ = total.stderr_of_mean();
  return rep;
}

MomentReport mc_moments(const ChaosExpansion& f, std::uint64_t n_samples,
                        std::uint64_t seed, int shards) {
  ExpansionEvaluator eval(f);
  const int m = f.Hdim;
  struct Shard {
    std::uint64_t n = 0;
    Eigen::VectorXd s2, s4, s8;  // sums of x^2, x^4, x^8 per coordinate
    Eigen::MatrixXd cov;
  };
  auto results = run_sharded<Shard>(
      n_samples, shards, seed,
      [&](std::mt19937_64& rng, std::uint64_t n, int) {
        Shard out;
        out.s2 = Eigen::VectorXd::Zero(m);
        out.s4 = Eigen::VectorXd::Zero(m);
        out.s8 = Eigen::VectorXd::Zero(m);
        out.cov = Eigen::MatrixXd::Zero(m, m);
        out.n = n;
        for (std::uint64_t s = 0; s < n; ++s) {
          Eigen::VectorXd x = eval.value(sample_isonormal(f.hdim, rng));
          Eigen::VectorXd x2 = x.cwiseProduct(x);
          Eigen::VectorXd x4 = x2.cwiseProduct(x2);
          out.s2 += x2;
          out.s4 += x4;
          out.s8 += x4.cwiseProduct(x4);
          out.cov += x * x.transpose();
        }
        return out;
      });
  Shard total;
  total.s2 = Eigen::VectorXd::Zero(m);
  total.s4 = Eigen::VectorXd::Zero(m);
  total.s8 = Eigen::VectorXd::Zero(m);
  total.cov = Eigen::MatrixXd::Zero(m, m);
  for (const auto& r : results) {
    total.n += r.n;
    total.s2 += r.s2;
    total.s4 += r.s4;
    total.s8 += r.s8;
    total.cov += r.cov;
  }
  MomentReport rep;
  rep.n_samples = total.n;
  const double n = static_cast<double>(total.n);
  rep.second = total.s2 / n;
  rep.fourth = total.s4 / n;
  rep.covariance = total.cov / n;
  rep.second_se.resize(m);
  rep.fourth_se.resize(m);
  for (int i = 0; i < m; ++i) {
    double v2 = std::max(0.0, total.s4(i) / n - rep.second(i) * rep.second(i));
    double v4 = std::max(0.0, total.s8(i) / n - rep.fourth(i) * rep.fourth(i));
    rep.second_se(i) = std::sqrt(v2 / n);
    rep.fourth_se(i) = std::sqrt(v4 / n);
  }
  return rep;
}

double polarized_weak_moment(const std::function<double(const Eigen::VectorXd&)>& quartic,
                             const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                             const Eigen::VectorXd& x3, const Eigen::VectorXd& x4) {
  const Eigen::VectorXd* xs[] = {&x1, &x2, &x3, &x4};
  double acc = 0.0;
  for (int mask = 1; mask < 16; ++mask) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(x1.size());
    int r = 0;
    for (int j = 0; j < 4; ++j) {
      if (mask & (1 << j)) {
        sum += *xs[j];
        ++r;
      }
    }
    double sign = ((4 - r) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * quartic(sum);
  }
  return acc / exact_factorial(4);
}

}  // namespace fmcert
