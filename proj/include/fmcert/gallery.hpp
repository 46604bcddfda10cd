#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmcert/operator_matrix.hpp"
#include "fmcert/tensor.hpp"

namespace fmcert {

/// A machine-checkable claim about a generated counterexample.
struct Claim {
  std::string description;
  double expected = 0.0;
  double actual = 0.0;
  double tol = 0.0;

  bool pass() const { return std::abs(expected - actual) <= tol; }
};

struct CounterexampleCase {
  std::string name;
  nlohmann::json parameters;
  std::vector<Claim> claims;

  bool all_pass() const;
};

nlohmann::json to_json(const CounterexampleCase& c);

/// Two degenerate Gaussian targets with equal traces and equal norm moments
/// but different laws: T1 = e1 (x) e1, T2 = e2 (x) e2 on dimension m >= 2.
struct Example11 {
  OperatorMatrix t1, t2;
  CounterexampleCase info;
};
Example11 example11_pair(int m);

/// Order-1 sequence F_n = Z + Y_n whose covariance S1 gap to T_Z stays
/// pinned at 1 while every finite-dimensional moment converges. Z uses
/// coordinates 1..Hdim of the truncated base space, Y_n fresh coordinates
/// Hdim+1..Hdim+n; s_{n,k} = k^{-g} / sum_{j<=n} j^{-g}.
struct Remark315 {
  ChaosExpansion f_n;
  OperatorMatrix t_z;
  std::vector<double> lambda;  // size Hdim
  std::vector<double> s;       // size n
  CounterexampleCase info;
};

/// Admissible g (the decay exponent) lies in (1/p_schatten, 1).
Remark315 remark315_sequence(double p_schatten, double g, int n, int Hdim,
                             const std::vector<double>& lambda = {});

/// Default eigenvalue sequence lambda_k = 2^{-k}.
std::vector<double> default_lambda(int Hdim);

}  // namespace fmcert
