#include "fmcert/operator_matrix.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace fmcert {

OperatorMatrix OperatorMatrix::basis_projector(int dim, int i) {
  if (i < 1 || i > dim) throw std::invalid_argument("basis index out of range");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m(i - 1, i - 1) = 1.0;
  return OperatorMatrix{std::move(m)};
}

bool OperatorMatrix::is_symmetric(double tol) const {
  return (entries - entries.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd singular_values(const OperatorMatrix& a) {
  if (!a.is_finite()) throw std::invalid_argument("non-finite operator entries");
  Eigen::MatrixXd gram = a.entries.transpose() * a.entries;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return ev.reverse();
}

double schatten_norm(const OperatorMatrix& a, double p) {
  if (p < 1.0) throw std::invalid_argument("Schatten exponent must be >= 1");
  Eigen::VectorXd s = singular_values(a);
  if (std::isinf(p)) return s.size() > 0 ? s(0) : 0.0;
  if (p == 1.0) return s.sum();
  if (p == 2.0) return std::sqrt(s.squaredNorm());
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) acc += std::pow(s(i), p);
  return std::pow(acc, 1.0 / p);
}

double trace(const OperatorMatrix& a) {
  if (!a.is_finite()) throw std::invalid_argument("non-finite operator entries");
  return a.entries.trace();
}

double min_eigenvalue(const OperatorMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.entries, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

BlockDecomposition block_decompose(const OperatorMatrix& a, int m) {
  const int n = a.dim();
  if (m < 0 || m > n) throw std::invalid_argument("projection cut out of range");
  Eigen::MatrixXd pp = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd qp = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd pq = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd qq = Eigen::MatrixXd::Zero(n, n);
  pp.topLeftCorner(m, m) = a.entries.topLeftCorner(m, m);
  qp.bottomLeftCorner(n - m, m) = a.entries.bottomLeftCorner(n - m, m);
  pq.topRightCorner(m, n - m) = a.entries.topRightCorner(m, n - m);
  qq.bottomRightCorner(n - m, n - m) = a.entries.bottomRightCorner(n - m, n - m);
  return {OperatorMatrix{std::move(pp)}, OperatorMatrix{std::move(qp)},
          OperatorMatrix{std::move(pq)}, OperatorMatrix{std::move(qq)}};
}

double finite_rank_s1_bound(const OperatorMatrix& a, int r) {
  // the rank check needs full relative accuracy on the small singular
  // values, which the squared eigenproblem cannot deliver
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.entries);
  Eigen::VectorXd s = svd.singularValues();
  const double tol = 1e-8 * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  for (int i = r; i < s.size(); ++i) {
    if (s(i) > tol) throw std::runtime_error("numerical rank exceeds asserted rank");
  }
  return std::sqrt(static_cast<double>(r)) * std::sqrt(s.squaredNorm());
}

nlohmann::json to_json(const OperatorMatrix& a) {
  std::vector<double> flat(a.entries.size());
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) flat[i * n + j] = a.entries(i, j);
  return nlohmann::json{{"dim", n}, {"entries", flat}};
}

OperatorMatrix operator_from_json(const nlohmann::json& j) {
  const int n = j.at("dim").get<int>();
  const auto flat = j.at("entries").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != n * n)
    throw std::invalid_argument("operator entry count does not match dim");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = flat[i * n + k];
  OperatorMatrix out{std::move(m)};
  if (!out.is_finite()) throw std::invalid_argument("non-finite operator entries");
  return out;
}

OperatorMatrix load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return operator_from_json(j);
}

void save_operator(const OperatorMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(a).dump(2) << "\n";
}

}  // namespace fmcert
