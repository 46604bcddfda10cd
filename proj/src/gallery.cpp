#include "fmcert/gallery.hpp"

#include <cmath>
#include <stdexcept>

#include "fmcert/chaos_sim.hpp"

namespace fmcert {

bool CounterexampleCase::all_pass() const {
  for (const auto& c : claims)
    if (!c.pass()) return false;
  return true;
}

nlohmann::json to_json(const CounterexampleCase& c) {
  nlohmann::json claims = nlohmann::json::array();
  for (const auto& cl : c.claims)
    claims.push_back({{"description", cl.description},
                      {"expected", cl.expected},
                      {"actual", cl.actual},
                      {"tol", cl.tol},
                      {"pass", cl.pass()}});
  return nlohmann::json{{"name", c.name}, {"parameters", c.parameters},
                        {"claims", claims}, {"all_pass", c.all_pass()}};
}

namespace {

// E |Z|^4 = (tr S)^2 + 2 tr(S^2) for Z ~ N(0, S).
double gaussian_norm_fourth_moment(const OperatorMatrix& s) {
  double t = trace(s);
  return t * t + 2.0 * (s.entries * s.entries).trace();
}

}  // namespace

Example11 example11_pair(int m) {
  if (m < 2) throw std::invalid_argument("example11_pair needs m >= 2");
  Example11 out;
  out.t1 = OperatorMatrix::basis_projector(m, 1);
  out.t2 = OperatorMatrix::basis_projector(m, 2);
  out.info.name = "example_1_1";
  out.info.parameters = nlohmann::json{{"m", m}};
  out.info.claims = {
      {"trace T1", 1.0, trace(out.t1), 1e-14},
      {"trace T2", 1.0, trace(out.t2), 1e-14},
      {"E|Z1|^4", 3.0, gaussian_norm_fourth_moment(out.t1), 1e-12},
      {"E|Z2|^4", 3.0, gaussian_norm_fourth_moment(out.t2), 1e-12},
      {"S1 distance", 2.0,
       schatten_norm(OperatorMatrix{out.t1.entries - out.t2.entries}, 1.0), 1e-12},
      {"weak fourth moment of Z2 along e1", 0.0,
       3.0 * out.t2.entries(0, 0) * out.t2.entries(0, 0), 1e-14},
  };
  return out;
}

std::vector<double> default_lambda(int Hdim) {
  std::vector<double> lambda(Hdim);
  for (int k = 1; k <= Hdim; ++k) lambda[k - 1] = std::pow(2.0, -k);
  return lambda;
}

Remark315 remark315_sequence(double p_schatten, double g, int n, int Hdim,
                             const std::vector<double>& lambda_in) {
  if (p_schatten <= 1.0) throw std::invalid_argument("Schatten exponent must exceed 1");
  if (g <= 1.0 / p_schatten || g >= 1.0)
    throw std::invalid_argument("decay exponent outside (1/p, 1)");
  if (n < 1 || n > Hdim) throw std::invalid_argument("need 1 <= n <= Hdim");
  Remark315 out;
  out.lambda = lambda_in.empty() ? default_lambda(Hdim) : lambda_in;
  if (static_cast<int>(out.lambda.size()) != Hdim)
    throw std::invalid_argument("lambda size mismatch");

  double s_n = 0.0;
  for (int k = 1; k <= n; ++k) s_n += std::pow(k, -g);
  out.s.resize(n);
  for (int k = 1; k <= n; ++k) out.s[k - 1] = std::pow(k, -g) / s_n;

  const int hdim = Hdim + n;
  ChaosExpansion f = ChaosExpansion::empty(hdim, Hdim);
  Kernel k1 = Kernel::zero(1, hdim, Hdim);
  for (int k = 1; k <= Hdim; ++k)
    k1.component(k).add({k}, std::sqrt(out.lambda[k - 1]));
  for (int k = 1; k <= n; ++k)
    k1.component(k).add({Hdim + k}, std::sqrt(out.s[k - 1]));
  f.set_kernel(std::move(k1));
  out.f_n = std::move(f);

  Eigen::MatrixXd tz = Eigen::MatrixXd::Zero(Hdim, Hdim);
  for (int k = 0; k < Hdim; ++k) tz(k, k) = out.lambda[k];
  out.t_z = OperatorMatrix{std::move(tz)};

  OperatorMatrix cov = exact_covariance(out.f_n);
  double s1_gap =
      schatten_norm(OperatorMatrix{cov.entries - out.t_z.entries}, 1.0);
  double var1 = cov.entries(0, 0);
  double expect4 = 3.0 * out.lambda[0] * out.lambda[0] +
                   6.0 * out.lambda[0] * out.s[0] + 3.0 * out.s[0] * out.s[0];

  out.info.name = "remark_3_1_5";
  out.info.parameters = nlohmann::json{
      {"p_schatten", p_schatten}, {"gamma", g}, {"n", n}, {"Hdim", Hdim}};
  out.info.claims = {
      {"S1 gap", 1.0, s1_gap, 1e-12},
      {"coordinate-1 fourth moment", expect4, 3.0 * var1 * var1, 1e-12},
  };
  return out;
}

}  // namespace fmcert
