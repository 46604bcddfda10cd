#include <doctest.h>

#include <cmath>
#include <random>

#include "fmcert/certificates.hpp"
#include "fmcert/chaos_sim.hpp"
#include "fmcert/constants.hpp"
#include "test_util.hpp"

using namespace fmcert;
namespace tu = fmcert::testutil;

namespace {

ChaosExpansion order2_h1h1(int Hdim = 1) {
  Kernel k = Kernel::zero(2, 2, Hdim);
  for (int i = 1; i <= Hdim; ++i) k.component(i).add({1, 1}, 1.0);
  ChaosExpansion f = ChaosExpansion::empty(2, Hdim);
  f.set_kernel(std::move(k));
  return f;
}

}  // namespace

TEST_CASE("constants table") {
  CHECK(constant_cp(2, 1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(constant_cp(3, 2) == doctest::Approx(12.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(constant_cp(3, 1) == doctest::Approx(3.0 * std::sqrt(24.0)).epsilon(1e-12));
  CHECK(constant_cpq(1, 2) == doctest::Approx(1.0));
  CHECK(constant_cpq(2, 3) == doctest::Approx(16.0));
  CHECK(constant_cpq(1, 3) == doctest::Approx(2.0));
  CHECK(constant_cpqchi(2, 2, 1) == doctest::Approx(4.0));
  CHECK(constant_cpqchi(2, 3, 1) == doctest::Approx(12.0));
  CHECK(constant_cpqchi(3, 3, 2) == doctest::Approx(144.0));
  CHECK_THROWS_AS(constant_cp(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(constant_cpq(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(constant_cpqchi(3, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(exact_factorial(40), std::overflow_error);
}

TEST_CASE("gamma terms") {
  SUBCASE("order 1 gives an empty chi sum") {
    Kernel k = Kernel::zero(1, 2, 1);
    k.component(1).add({1}, 1.0);
    ChaosExpansion f = ChaosExpansion::empty(2, 1);
    f.set_kernel(std::move(k));
    GammaTerms g = gamma_terms(f, 1, 1, 2);
    CHECK(g.same_order.at(1) == 0.0);
    CHECK(g.cross_order.empty());
    CHECK(g.total() == 0.0);
  }
  SUBCASE("single order-2 kernel h1h1 in every component") {
    ChaosExpansion f = order2_h1h1(2);
    GammaTerms g = gamma_terms(f, 1, 2, 2);
    CHECK(g.same_order.at(2) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("indicator term uses the first power of the contraction norm") {
    // f1 = h1, f2 = 2 h1h1: ||f2 (x)_1 f2|| = 4, so gamma^{(1,2)} must be
    // c(1,2) * ||f1||^2 * 4 = 4, not 16.
    ChaosExpansion f = ChaosExpansion::empty(2, 1);
    Kernel k1 = Kernel::zero(1, 2, 1);
    k1.component(1).add({1}, 1.0);
    Kernel k2 = Kernel::zero(2, 2, 1);
    k2.component(1).add({1, 1}, 2.0);
    f.set_kernel(std::move(k1));
    f.set_kernel(std::move(k2));
    GammaTerms g = gamma_terms(f, 1, 1, 2);
    CHECK(g.cross_order.at({1, 2}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(g.cross_order.at({1, 2}) != doctest::Approx(16.0));
    CHECK(g.cross_order.at({2, 1}) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("r terms") {
  SUBCASE("exactly Gaussian expansion with matching target") {
    Kernel k = Kernel::zero(1, 2, 2);
    k.component(1).add({1}, 1.0);
    k.component(2).add({2}, 0.5);
    ChaosExpansion f = ChaosExpansion::empty(2, 2);
    f.set_kernel(std::move(k));
    TargetSpec t = TargetSpec::single(exact_covariance(f), 1);
    CertificateReport rep = r_terms(f, t, 1, 2);
    CHECK(rep.R1 == 0.0);
    CHECK(rep.R2 <= 1e-12);
    CHECK(rep.R3 == 0.0);
    CHECK(rep.R4 == 0.0);
    CHECK(rep.R5 == 0.0);
    CHECK(rep.R6 == 0.0);
    CHECK(rep.bound <= 1e-12);
  }
  SUBCASE("order-2 example with m_cut 1") {
    ChaosExpansion f = order2_h1h1(1);
    TargetSpec t = TargetSpec::single(
        OperatorMatrix{2.0 * Eigen::MatrixXd::Identity(1, 1)}, 2);
    CertificateReport rep = r_terms(f, t, 2, 1);
    CHECK(rep.R2 <= 1e-12);
    CHECK(rep.R3 == doctest::Approx(2.0 * std::sqrt(8.0)).epsilon(1e-12));
    CHECK(rep.R4 == 0.0);
    CHECK(rep.R5 == 0.0);
    CHECK(rep.bound == doctest::Approx(2.0 * std::sqrt(8.0)).epsilon(1e-12));
  }
}

TEST_CASE("certificate grid search") {
  std::mt19937_64 rng(41);
  ChaosExpansion f = ChaosExpansion::empty(3, 2);
  Kernel k1 = Kernel::zero(1, 3, 2);
  k1.component(1).add({1}, 0.8);
  k1.component(2).add({2}, 0.3);
  Kernel k2 = Kernel::zero(2, 3, 2);
  k2.component(1) = tu::random_symmetric_kernel(2, 3, rng, 0.3);
  f.set_kernel(std::move(k1));
  f.set_kernel(std::move(k2));
  TargetSpec t = TargetSpec::single(exact_covariance(f.single_order(1)), 1);

  SUBCASE("finer grids never increase the bound") {
    CertificateReport coarse = theorem35_bound(f, t, {2}, {1});
    CertificateReport fine = theorem35_bound(f, t, {1, 2}, {1, 2});
    CHECK(fine.bound <= coarse.bound + 1e-14);
    CHECK(fine.grid_table.size() == 4);
    for (const auto& g : fine.grid_table)
      CHECK(g.bound == doctest::Approx(g.R1 + g.R2 + g.R3 + g.R4 + g.R5 + g.R6));
  }
  SUBCASE("Gaussian match with full grids gives zero") {
    ChaosExpansion g = f.single_order(1);
    TargetSpec tg = TargetSpec::single(exact_covariance(g), 1);
    CertificateReport rep = theorem35_bound(g, tg, {1}, {2});
    CHECK(rep.bound <= 1e-12);
  }
  SUBCASE("empty grid is rejected") {
    CHECK_THROWS_AS(theorem35_bound(f, t, {}, {1}), std::invalid_argument);
  }
}

TEST_CASE("fixed chaos bound") {
  SUBCASE("order-1 with matching target is zero at full cut") {
    Kernel k = Kernel::zero(1, 2, 2);
    k.component(1).add({1}, 1.0);
    CertificateReport rep = fixed_chaos_bound(
        k, OperatorMatrix{Eigen::MatrixXd::Identity(2, 2).eval()}, {2});
    // target has an extra unit in coordinate 2, so only R2 survives
    CHECK(rep.R3 == 0.0);
    CHECK(rep.R4 == 0.0);
    CHECK(rep.bound == doctest::Approx(0.5));
    OperatorMatrix exact_t = order_covariance(k);
    CHECK(fixed_chaos_bound(k, exact_t, {2}).bound <= 1e-12);
  }
  SUBCASE("order-2 anchor value") {
    ChaosExpansion f = order2_h1h1(1);
    CertificateReport rep = fixed_chaos_bound(
        *f.kernel(2), OperatorMatrix{2.0 * Eigen::MatrixXd::Identity(1, 1)}, {1});
    CHECK(rep.bound == doctest::Approx(2.0 * std::sqrt(8.0)).epsilon(1e-12));
  }
  SUBCASE("agreement with the general path at every grid point") {
    std::mt19937_64 rng(43);
    for (int rep_i = 0; rep_i < 5; ++rep_i) {
      Kernel k = Kernel::zero(3, 3, 2);
      k.component(1) = tu::random_symmetric_kernel(3, 3, rng, 0.4);
      k.component(2) = tu::random_symmetric_kernel(3, 3, rng, 0.4);
      ChaosExpansion f = ChaosExpansion::empty(3, 2);
      Kernel copy = k;
      f.set_kernel(std::move(copy));
      TargetSpec t = TargetSpec::single(OperatorMatrix{tu::random_psd(2, rng)}, 3);
      for (int m : {0, 1, 2}) {
        CertificateReport a = fixed_chaos_bound(k, *t.order(3), {m});
        CertificateReport b = theorem35_bound(f, t, {3}, {m});
        REQUIRE(a.bound == doctest::Approx(b.bound).epsilon(1e-12));
        REQUIRE(a.R2 == doctest::Approx(b.R2).epsilon(1e-12));
        REQUIRE(a.R3 == doctest::Approx(b.R3).epsilon(1e-12));
        REQUIRE(a.R4 == doctest::Approx(b.R4).epsilon(1e-12));
        REQUIRE(a.R5 == doctest::Approx(b.R5).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gaussian pair bound") {
  SUBCASE("examples") {
    OperatorMatrix t1 = OperatorMatrix::basis_projector(2, 1);
    OperatorMatrix t2 = OperatorMatrix::basis_projector(2, 2);
    std::vector<std::string> warn;
    CHECK(gaussian_pair_bound(t1, t1) == 0.0);
    CHECK(gaussian_pair_bound(t1, t2, &warn) == doctest::Approx(1.0));
    CHECK(warn.size() == 1);
    Eigen::MatrixXd d20 = Eigen::MatrixXd::Zero(2, 2);
    d20(0, 0) = 2.0;
    CHECK(gaussian_pair_bound(OperatorMatrix{d20},
                              OperatorMatrix{Eigen::MatrixXd::Identity(2, 2).eval()}) ==
          doctest::Approx(1.0));
    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(gaussian_pair_bound(OperatorMatrix{neg}, t1), std::invalid_argument);
  }
  SUBCASE("pseudometric on random PSD triples") {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 20; ++rep) {
      OperatorMatrix a{tu::random_psd(4, rng)};
      OperatorMatrix b{tu::random_psd(4, rng)};
      OperatorMatrix c{tu::random_psd(4, rng)};
      double ab = gaussian_pair_bound(a, b);
      double ba = gaussian_pair_bound(b, a);
      REQUIRE(ab == doctest::Approx(ba).epsilon(1e-10));
      REQUIRE(gaussian_pair_bound(a, c) <= ab + gaussian_pair_bound(b, c) + 1e-10);
    }
  }
}

TEST_CASE("condition checker") {
  ChaosExpansion f = order2_h1h1(1);
  TargetSpec t = TargetSpec::single(
      OperatorMatrix{2.0 * Eigen::MatrixXd::Identity(1, 1)}, 2);
  FmtConditionReport rep = check_fmt_conditions(f, t, 0.5);
  CHECK(rep.trace_gap.at(2) <= 1e-12);
  CHECK(rep.contraction_max.at(2) == doctest::Approx(1.0));
  CHECK_FALSE(rep.contraction_ok.at(2));
  CHECK(rep.order_tail.at(2) == 0.0);
  CHECK(rep.order_tail.at(1) == doctest::Approx(2.0));
  CHECK_FALSE(rep.all_ok());
}

TEST_CASE("vector chaos flattening") {
  std::mt19937_64 rng(53);
  Kernel a = Kernel::zero(1, 3, 2);
  a.component(1).add({1}, 0.5);
  a.component(2).add({2}, 1.5);
  Kernel b = Kernel::zero(2, 3, 2);
  b.component(1) = tu::random_symmetric_kernel(2, 3, rng, 0.5);
  b.component(2) = tu::random_symmetric_kernel(2, 3, rng, 0.5);

  SUBCASE("single component is an identity embedding") {
    ChaosExpansion f = flatten_vector_chaos({{1, a}});
    CHECK(f.Hdim == 2);
    CHECK(f.kernel(1)->component(1).at({1}) == doctest::Approx(0.5));
  }
  SUBCASE("distinct orders land in disjoint blocks") {
    ChaosExpansion f = flatten_vector_chaos({{1, a}, {2, b}});
    CHECK(f.Hdim == 4);
    CHECK(f.kernel(1)->component(1).at({1}) == doctest::Approx(0.5));
    CHECK(f.kernel(1)->component(3).empty());
    CHECK(f.kernel(2)->component(1).empty());
    CHECK_FALSE(f.kernel(2)->component(3).empty());
  }
  SUBCASE("covariance is block diagonal with additive S1 norm") {
    ChaosExpansion f = flatten_vector_chaos({{1, a}, {2, b}});
    OperatorMatrix cov = exact_covariance(f);
    CHECK(cov.entries.topRightCorner(2, 2).cwiseAbs().maxCoeff() <= 1e-14);
    ChaosExpansion fa = ChaosExpansion::empty(3, 2);
    Kernel ca = a;
    fa.set_kernel(std::move(ca));
    ChaosExpansion fb = ChaosExpansion::empty(3, 2);
    Kernel cb = b;
    fb.set_kernel(std::move(cb));
    double s1_parts = schatten_norm(exact_covariance(fa), 1.0) +
                      schatten_norm(exact_covariance(fb), 1.0);
    CHECK(schatten_norm(cov, 1.0) == doctest::Approx(s1_parts).epsilon(1e-10));
  }
  SUBCASE("mismatched truncations are rejected") {
    Kernel bad = Kernel::zero(1, 2, 2);
    CHECK_THROWS_AS(flatten_vector_chaos({{1, a}, {1, bad}}), std::invalid_argument);
  }
}

TEST_CASE("target spec JSON") {
  OperatorMatrix op = OperatorMatrix::basis_projector(2, 1);
  SUBCASE("bare operator reads as order 1") {
    TargetSpec t = target_from_json(to_json(op));
    CHECK(t.Hdim == 2);
    CHECK(t.order(1) != nullptr);
  }
  SUBCASE("round trip with orders") {
    TargetSpec t;
    t.Hdim = 2;
    t.orders.emplace(1, op);
    t.orders.emplace(3, OperatorMatrix::zero(2));
    TargetSpec u = target_from_json(to_json(t));
    CHECK(u.orders.size() == 2);
    CHECK(u.order(3)->entries.cwiseAbs().maxCoeff() == 0.0);
    CHECK(u.total_trace() == doctest::Approx(1.0));
    CHECK(trace(u.aggregate()) == doctest::Approx(1.0));
  }
}
