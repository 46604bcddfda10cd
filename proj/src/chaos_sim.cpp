#include "fmcert/chaos_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "fmcert/constants.hpp"

namespace fmcert {

double hermite_he(int k, double x) {
  if (k < 0) throw std::invalid_argument("negative Hermite degree");
  double prev = 1.0, cur = x;
  if (k == 0) return prev;
  for (int j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Eigen::VectorXd sample_isonormal(int hdim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd xi(hdim);
  for (int k = 0; k < hdim; ++k) xi(k) = gauss(rng);
  return xi;
}

double eval_multiple_integral(const ScalarKernel& f, const Eigen::VectorXd& xi) {
  double acc = 0.0;
  for (const auto& [tuple, v] : f.coeffs) {
    double prod = permutation_count(tuple) * v;
    int run = 1;
    for (size_t t = 0; t < tuple.size(); ++t) {
      if (t + 1 < tuple.size() && tuple[t + 1] == tuple[t]) {
        ++run;
        continue;
      }
      prod *= hermite_he(run, xi(tuple[t] - 1));
      run = 1;
    }
    acc += prod;
  }
  return acc;
}

Eigen::VectorXd eval_expansion(const ChaosExpansion& f, const Eigen::VectorXd& xi) {
  return ExpansionEvaluator(f).value(xi);
}

OperatorMatrix order_covariance(const Kernel& f) {
  const double rf = exact_factorial(f.order);
  Eigen::MatrixXd m(f.Hdim, f.Hdim);
  for (int i = 0; i < f.Hdim; ++i) {
    for (int j = i; j < f.Hdim; ++j) {
      m(i, j) = m(j, i) = rf * kernel_dot(f.components[i], f.components[j]);
    }
  }
  return OperatorMatrix{std::move(m)};
}

OperatorMatrix exact_covariance(const ChaosExpansion& f) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(f.Hdim, f.Hdim);
  for (const auto& [r, kern] : f.kernels) m += order_covariance(kern).entries;
  return OperatorMatrix{std::move(m)};
}

double exact_fourth_excess(const ScalarKernel& f) {
  const int p = f.order;
  const double pf = exact_factorial(p);
  double acc = 0.0;
  for (int r = 1; r <= p - 1; ++r) {
    ContractionTensor t = contract(f, f, r);
    double raw = frobenius_norm_sq(t);
    double sym = kernel_norm_sq(symmetrize(t));
    double b = exact_binomial(p, r);
    acc += pf * pf * b * b * (raw + exact_binomial(2 * p - 2 * r, p - r) * sym);
  }
  return acc;
}

ExpansionEvaluator::ExpansionEvaluator(const ChaosExpansion& f)
    : hdim_(f.hdim), Hdim_(f.Hdim) {
  value_terms_.resize(Hdim_);
  auto compile = [](const IndexTuple& tuple, double v) {
    Term t;
    t.coeff = permutation_count(tuple) * v;
    t.order = static_cast<int>(tuple.size());
    int run = 1;
    for (size_t k = 0; k < tuple.size(); ++k) {
      if (k + 1 < tuple.size() && tuple[k + 1] == tuple[k]) {
        ++run;
        continue;
      }
      t.factors.emplace_back(tuple[k] - 1, run);
      run = 1;
    }
    return t;
  };
  for (const auto& [r, kern] : f.kernels) {
    for (int i = 0; i < Hdim_; ++i) {
      for (const auto& [tuple, v] : kern.components[i].coeffs) {
        value_terms_[i].push_back(compile(tuple, v));
        // One slice per distinct index in the tuple: f_{r,i}(k, .) has
        // coefficient v at the tuple with one copy of k removed.
        IndexTuple rest;
        rest.reserve(tuple.size() - 1);
        for (size_t k = 0; k < tuple.size(); ++k) {
          if (k > 0 && tuple[k] == tuple[k - 1]) continue;
          rest.assign(tuple.begin(), tuple.end());
          rest.erase(rest.begin() + static_cast<long>(k));
          Term st = compile(rest, v);
          st.order = r;
          slice_terms_.push_back({tuple[k] - 1, i, std::move(st)});
        }
      }
    }
  }
  for (const auto& comp : value_terms_)
    for (const auto& t : comp)
      for (const auto& [idx, mult] : t.factors)
        if (mult > max_degree_) max_degree_ = mult;
}

void ExpansionEvaluator::hermite_table(const Eigen::VectorXd& xi,
                                       Eigen::MatrixXd& he) const {
  he.resize(hdim_, max_degree_ + 1);
  he.col(0).setOnes();
  if (max_degree_ >= 1) he.col(1) = xi.head(hdim_);
  for (int k = 2; k <= max_degree_; ++k)
    he.col(k) = xi.head(hdim_).cwiseProduct(he.col(k - 1)) - (k - 1) * he.col(k - 2);
}

double ExpansionEvaluator::term_value(const Term& t, const Eigen::MatrixXd& he) {
  double prod = t.coeff;
  for (const auto& [idx, mult] : t.factors) prod *= he(idx, mult);
  return prod;
}

Eigen::VectorXd ExpansionEvaluator::value(const Eigen::VectorXd& xi) const {
  Eigen::MatrixXd he;
  hermite_table(xi, he);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Hdim_);
  for (int i = 0; i < Hdim_; ++i)
    for (const auto& t : value_terms_[i]) out(i) += term_value(t, he);
  return out;
}

void ExpansionEvaluator::derivatives(const Eigen::VectorXd& xi,
                                     Eigen::MatrixXd& d_f,
                                     Eigen::MatrixXd& d_l) const {
  Eigen::MatrixXd he;
  hermite_table(xi, he);
  d_f = Eigen::MatrixXd::Zero(hdim_, Hdim_);
  d_l = Eigen::MatrixXd::Zero(hdim_, Hdim_);
  for (const auto& st : slice_terms_) {
    double v = term_value(st.term, he);
    d_f(st.row, st.col) += st.term.order * v;
    d_l(st.row, st.col) += v;
  }
}

Eigen::MatrixXd ExpansionEvaluator::gamma(const Eigen::VectorXd& xi) const {
  Eigen::MatrixXd d_f, d_l;
  derivatives(xi, d_f, d_l);
  return d_f.transpose() * d_l;
}

Eigen::MatrixXd malliavin_derivative_eval(const ChaosExpansion& f,
                                          const Eigen::VectorXd& xi) {
  Eigen::MatrixXd d_f, d_l;
  ExpansionEvaluator(f).derivatives(xi, d_f, d_l);
  return d_f;
}

Eigen::MatrixXd gamma_matrix(const ChaosExpansion& f, const ChaosExpansion& g,
                             const Eigen::VectorXd& xi) {
  if (f.hdim != g.hdim) throw std::invalid_argument("expansions live on different spaces");
  return malliavin_derivative_eval(f, xi).transpose() *
         malliavin_derivative_eval(g, xi);
}

}  // namespace fmcert
