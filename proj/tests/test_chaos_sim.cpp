#include <doctest.h>

#include <cmath>
#include <random>

#include "fmcert/chaos_sim.hpp"
#include "fmcert/constants.hpp"
#include "fmcert/mc.hpp"
#include "test_util.hpp"

using namespace fmcert;
namespace tu = fmcert::testutil;

namespace {

ChaosExpansion single_kernel(const ScalarKernel& f) {
  Kernel k = Kernel::zero(f.order, f.dim, 1);
  k.component(1) = f;
  ChaosExpansion e = ChaosExpansion::empty(f.dim, 1);
  e.set_kernel(std::move(k));
  return e;
}

ScalarKernel h1h1() {
  ScalarKernel f = ScalarKernel::zero(2, 2);
  f.add({1, 1}, 1.0);
  return f;
}

ScalarKernel h1h2_sym() {
  ScalarKernel f = ScalarKernel::zero(2, 2);
  f.add({1, 2}, 1.0 / std::sqrt(2.0));
  return f;
}

}  // namespace

TEST_CASE("Hermite recurrence") {
  for (double x : {-1.3, 0.0, 0.7, 2.5}) {
    CHECK(hermite_he(0, x) == doctest::Approx(1.0));
    CHECK(hermite_he(1, x) == doctest::Approx(x));
    CHECK(hermite_he(2, x) == doctest::Approx(x * x - 1.0));
    CHECK(hermite_he(3, x) == doctest::Approx(x * x * x - 3.0 * x));
    CHECK(hermite_he(4, x) == doctest::Approx(x * x * x * x - 6.0 * x * x + 3.0));
  }
}

TEST_CASE("isonormal sampling is deterministic and standardized") {
  std::mt19937_64 a(42), b(42);
  Eigen::VectorXd xa = sample_isonormal(5, a);
  Eigen::VectorXd xb = sample_isonormal(5, b);
  CHECK((xa - xb).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(99);
  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3), second = Eigen::VectorXd::Zero(3);
  for (int s = 0; s < n; ++s) {
    Eigen::VectorXd x = sample_isonormal(3, rng);
    mean += x;
    second += x.cwiseProduct(x);
  }
  mean /= n;
  second /= n;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(mean(i)) <= 5.0 / std::sqrt(n));
    CHECK(std::abs(second(i) - 1.0) <= 5.0 * std::sqrt(2.0 / n));
  }
}

TEST_CASE("multiple integral evaluation") {
  Eigen::VectorXd xi(2);
  xi << 1.7, -0.4;
  CHECK(eval_multiple_integral(h1h1(), xi) == doctest::Approx(1.7 * 1.7 - 1.0));
  CHECK(eval_multiple_integral(h1h2_sym(), xi) ==
        doctest::Approx(std::sqrt(2.0) * 1.7 * -0.4));
}

TEST_CASE("expansion evaluation") {
  Eigen::VectorXd xi(2);
  xi << 0.9, 1.1;
  SUBCASE("order-1 kernel is linear") {
    Kernel k = Kernel::zero(1, 2, 3);
    k.component(1).add({1}, 1.0);
    ChaosExpansion f = ChaosExpansion::empty(2, 3);
    f.set_kernel(std::move(k));
    Eigen::VectorXd v = eval_expansion(f, xi);
    CHECK(v(0) == doctest::Approx(0.9));
    CHECK(v(1) == 0.0);
    CHECK(v(2) == 0.0);
  }
  SUBCASE("empty expansion is zero") {
    ChaosExpansion f = ChaosExpansion::empty(2, 2);
    CHECK(eval_expansion(f, xi).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("exact covariance") {
  SUBCASE("order-1 projector") {
    Kernel k = Kernel::zero(1, 2, 2);
    k.component(1).add({1}, 1.0);
    ChaosExpansion f = ChaosExpansion::empty(2, 2);
    f.set_kernel(std::move(k));
    OperatorMatrix cov = exact_covariance(f);
    CHECK(cov.entries(0, 0) == doctest::Approx(1.0));
    CHECK(cov.entries(1, 1) == 0.0);
  }
  SUBCASE("order-2 isometry factor") {
    OperatorMatrix cov = exact_covariance(single_kernel(h1h1()));
    CHECK(cov.entries(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("MC covariance agreement on a random expansion") {
    std::mt19937_64 rng(5);
    ChaosExpansion f = ChaosExpansion::empty(3, 2);
    Kernel k1 = Kernel::zero(1, 3, 2);
    k1.component(1).add({2}, 0.7);
    Kernel k2 = Kernel::zero(2, 3, 2);
    k2.component(1) = tu::random_symmetric_kernel(2, 3, rng, 0.4);
    k2.component(2) = tu::random_symmetric_kernel(2, 3, rng, 0.4);
    f.set_kernel(std::move(k1));
    f.set_kernel(std::move(k2));
    OperatorMatrix cov = exact_covariance(f);
    const int n = 200000;
    Eigen::MatrixXd mc = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd mc2 = Eigen::MatrixXd::Zero(2, 2);
    ExpansionEvaluator eval(f);
    for (int s = 0; s < n; ++s) {
      Eigen::VectorXd x = eval.value(sample_isonormal(3, rng));
      Eigen::MatrixXd o = x * x.transpose();
      mc += o;
      mc2 += o.cwiseProduct(o);
    }
    mc /= n;
    mc2 /= n;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double se = std::sqrt(std::max(0.0, mc2(i, j) - mc(i, j) * mc(i, j)) / n);
        REQUIRE(std::abs(mc(i, j) - cov.entries(i, j)) <= 5.0 * se + 1e-12);
      }
  }
}

TEST_CASE("exact fourth excess anchors") {
  CHECK(exact_fourth_excess(h1h1()) == doctest::Approx(48.0).epsilon(1e-12));
  CHECK(exact_fourth_excess(h1h2_sym()) == doctest::Approx(24.0).epsilon(1e-12));
  ScalarKernel f1 = ScalarKernel::zero(1, 2);
  f1.add({1}, 2.0);
  CHECK(exact_fourth_excess(f1) == 0.0);
}

TEST_CASE("Malliavin derivative evaluation") {
  Eigen::VectorXd xi(2);
  xi << 1.4, -0.2;
  SUBCASE("first chaos has constant derivative") {
    Kernel k = Kernel::zero(1, 2, 2);
    k.component(1).add({1}, 1.0);
    ChaosExpansion f = ChaosExpansion::empty(2, 2);
    f.set_kernel(std::move(k));
    Eigen::MatrixXd d = malliavin_derivative_eval(f, xi);
    CHECK(d(0, 0) == doctest::Approx(1.0));
    CHECK(d.cwiseAbs().sum() == doctest::Approx(1.0));
  }
  SUBCASE("order-2 slice rule") {
    Eigen::MatrixXd d = malliavin_derivative_eval(single_kernel(h1h1()), xi);
    CHECK(d(0, 0) == doctest::Approx(2.0 * 1.4));
    CHECK(d(1, 0) == 0.0);
  }
}

TEST_CASE("gamma samples") {
  std::mt19937_64 rng(31);
  SUBCASE("first chaos gamma is deterministic") {
    Kernel k = Kernel::zero(1, 2, 2);
    k.component(1).add({1}, 1.0);
    ChaosExpansion f = ChaosExpansion::empty(2, 2);
    f.set_kernel(std::move(k));
    ExpansionEvaluator eval(f);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::MatrixXd g = eval.gamma(sample_isonormal(2, rng));
      CHECK(g(0, 0) == doctest::Approx(1.0));
      CHECK(g(1, 1) == 0.0);
      CHECK(g(0, 1) == 0.0);
    }
  }
  SUBCASE("fixed-chaos gamma is PSD and (1/p) A'A") {
    ChaosExpansion f = ChaosExpansion::empty(3, 1);
    Kernel k = Kernel::zero(3, 3, 1);
    k.component(1) = tu::random_symmetric_kernel(3, 3, rng, 0.5);
    f.set_kernel(std::move(k));
    ExpansionEvaluator eval(f);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd xi = sample_isonormal(3, rng);
      Eigen::MatrixXd g = eval.gamma(xi);
      Eigen::MatrixXd a = malliavin_derivative_eval(f, xi);
      CHECK((g - a.transpose() * a / 3.0).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(min_eigenvalue(OperatorMatrix{(g + g.transpose()) / 2.0}) >= -1e-9);
    }
  }
  SUBCASE("Gamma(F,G) transposes exactly") {
    ChaosExpansion f = ChaosExpansion::empty(3, 2);
    Kernel kf = Kernel::zero(2, 3, 2);
    kf.component(1) = tu::random_symmetric_kernel(2, 3, rng, 0.5);
    kf.component(2) = tu::random_symmetric_kernel(2, 3, rng, 0.5);
    f.set_kernel(std::move(kf));
    ChaosExpansion g = ChaosExpansion::empty(3, 2);
    Kernel kg = Kernel::zero(3, 3, 2);
    kg.component(1) = tu::random_symmetric_kernel(3, 3, rng, 0.5);
    kg.component(2) = tu::random_symmetric_kernel(3, 3, rng, 0.5);
    g.set_kernel(std::move(kg));
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd xi = sample_isonormal(3, rng);
      Eigen::MatrixXd fg = gamma_matrix(f, g, xi);
      Eigen::MatrixXd gf = gamma_matrix(g, f, xi);
      REQUIRE((fg - gf.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("isometry and orthogonality by MC on small kernels") {
  std::mt19937_64 rng(37);
  ScalarKernel f = tu::random_symmetric_kernel(2, 3, rng, 0.5);
  ScalarKernel g = tu::random_symmetric_kernel(3, 3, rng, 0.5);
  const int n = 200000;
  MeanAccumulator iso, cross;
  for (int s = 0; s < n; ++s) {
    Eigen::VectorXd xi = sample_isonormal(3, rng);
    double vf = eval_multiple_integral(f, xi);
    double vg = eval_multiple_integral(g, xi);
    iso.add(vf * vf);
    cross.add(vf * vg);
  }
  CHECK(std::abs(iso.mean() - 2.0 * kernel_norm_sq(f)) <=
        5.0 * iso.stderr_of_mean());
  CHECK(std::abs(cross.mean()) <= 5.0 * cross.stderr_of_mean());
}

TEST_CASE("sharded MC runner is deterministic and shard-stable in distribution") {
  auto run = [](int shards) {
    auto parts = run_sharded<MeanAccumulator>(
        100000, shards, 7,
        [](std::mt19937_64& rng, std::uint64_t n, int) {
          MeanAccumulator acc;
          std::normal_distribution<double> gauss;
          for (std::uint64_t s = 0; s < n; ++s) acc.add(gauss(rng));
          return acc;
        });
    MeanAccumulator total;
    for (const auto& p : parts) total.merge(p);
    return total;
  };
  MeanAccumulator a = run(4), b = run(4);
  CHECK(a.mean() == b.mean());
  CHECK(std::abs(a.mean()) <= 5.0 * a.stderr_of_mean());
}
