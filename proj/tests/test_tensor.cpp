#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "fmcert/tensor.hpp"
#include "test_util.hpp"

using namespace fmcert;
namespace tu = fmcert::testutil;

namespace {

ScalarKernel pure_h1h1(int d = 2) {
  ScalarKernel f = ScalarKernel::zero(2, d);
  f.add({1, 1}, 1.0);
  return f;
}

ScalarKernel sym_h1h2(int d = 2) {
  // (h1 (x) h2 + h2 (x) h1)/sqrt(2): symmetric coefficient 1/sqrt(2) at {1,2}
  ScalarKernel f = ScalarKernel::zero(2, d);
  f.add({1, 2}, 1.0 / std::sqrt(2.0));
  return f;
}

}  // namespace

TEST_CASE("permutation counts") {
  CHECK(permutation_count({1, 1}) == doctest::Approx(1.0));
  CHECK(permutation_count({1, 2}) == doctest::Approx(2.0));
  CHECK(permutation_count({1, 2, 2, 3}) == doctest::Approx(12.0));
  CHECK(distinct_arrangements({1, 2, 2}).size() == 3);
}

TEST_CASE("symmetrize raw tensors") {
  SUBCASE("h1 (x) h2 averages to half on each ordering") {
    RawTensor raw;
    raw.order = 2;
    raw.dim = 2;
    raw.add({1, 2}, 1.0);
    ScalarKernel s = symmetrize(raw);
    CHECK(s.at({1, 2}) == doctest::Approx(0.5));
    CHECK(s.at({2, 1}) == doctest::Approx(0.5));
    CHECK(kernel_norm_sq(s) == doctest::Approx(0.5));
  }
  SUBCASE("idempotence on symmetric input") {
    std::mt19937_64 rng(3);
    ScalarKernel s = tu::random_symmetric_kernel(3, 3, rng);
    RawTensor back;
    back.order = 3;
    back.dim = 3;
    for (const auto& [t, v] : s.coeffs)
      for (const auto& arr : distinct_arrangements(t)) back.add(arr, v);
    ScalarKernel s2 = symmetrize(back, true);
    for (const auto& [t, v] : s.coeffs) CHECK(s2.at(t) == doctest::Approx(v));
  }
  SUBCASE("order-3 output invariant under permutations") {
    std::mt19937_64 rng(5);
    RawTensor raw = tu::random_raw(3, 3, rng);
    ScalarKernel s = symmetrize(raw);
    // one stored value per sorted tuple serves every arrangement by
    // construction; check the defining average against the raw tensor
    for (const auto& [t, v] : s.coeffs) {
      double avg = 0.0;
      auto arrs = distinct_arrangements(t);
      for (const auto& arr : arrs) {
        auto it = raw.values.find(arr);
        double raw_v = it == raw.values.end() ? 0.0 : it->second;
        avg += raw_v * (permutation_count(t) / arrs.size());
      }
      avg /= permutation_count(t);
      CHECK(v == doctest::Approx(avg).epsilon(1e-12));
    }
  }
  SUBCASE("strict mode rejects asymmetric input") {
    RawTensor raw;
    raw.order = 2;
    raw.dim = 2;
    raw.add({1, 2}, 1.0);
    CHECK_THROWS_AS(symmetrize(raw, true), std::invalid_argument);
  }
}

TEST_CASE("contractions") {
  SUBCASE("h1h1 with itself at depth 1") {
    ContractionTensor t = contract(pure_h1h1(), pure_h1h1(), 1);
    CHECK(frobenius_norm_sq(t) == doctest::Approx(1.0));
    ScalarKernel s = symmetrize(t);
    CHECK(s.at({1, 1}) == doctest::Approx(1.0));
  }
  SUBCASE("hand expansion of the mixed symmetric kernel") {
    ContractionTensor t = contract(sym_h1h2(), sym_h1h2(), 1);
    CHECK(frobenius_norm_sq(t) == doctest::Approx(0.5));
    ScalarKernel s = symmetrize(t);
    CHECK(s.at({1, 1}) == doctest::Approx(0.5));
    CHECK(s.at({2, 2}) == doctest::Approx(0.5));
    CHECK(s.at({1, 2}) == doctest::Approx(0.0));
  }
  SUBCASE("full contraction is the inner product") {
    std::mt19937_64 rng(7);
    ScalarKernel f = tu::random_symmetric_kernel(3, 3, rng);
    ScalarKernel g = tu::random_symmetric_kernel(3, 3, rng);
    CHECK(contract(f, g, 3).scalar() == doctest::Approx(kernel_dot(f, g)).epsilon(1e-12));
  }
  SUBCASE("depth 0 is the tensor product") {
    ContractionTensor t = contract(pure_h1h1(), sym_h1h2(), 0);
    CHECK(frobenius_norm_sq(t) ==
          doctest::Approx(kernel_norm_sq(pure_h1h1()) * kernel_norm_sq(sym_h1h2())));
  }
  SUBCASE("invalid depth") {
    CHECK_THROWS_AS(contract(pure_h1h1(), pure_h1h1(), 3), std::invalid_argument);
  }
}

TEST_CASE("kernel norms") {
  CHECK(kernel_norm(pure_h1h1()) == doctest::Approx(1.0));
  CHECK(kernel_norm(sym_h1h2()) == doctest::Approx(1.0));
  std::mt19937_64 rng(11);
  ScalarKernel f = tu::random_symmetric_kernel(4, 3, rng);
  CHECK(kernel_norm_sq(f) == doctest::Approx(contract(f, f, 4).scalar()).epsilon(1e-12));
}

TEST_CASE("contraction properties on random symmetric kernels") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    ScalarKernel f = tu::random_symmetric_kernel(3, 3, rng);
    ScalarKernel g = tu::random_symmetric_kernel(3, 3, rng);
    for (int r = 1; r <= 2; ++r) {
      double fg = frobenius_norm(contract(f, g, r));
      double gf = frobenius_norm(contract(g, f, r));
      REQUIRE(fg == doctest::Approx(gf).epsilon(1e-10));
      REQUIRE(fg <= kernel_norm(f) * kernel_norm(g) + 1e-10);
      // <f (x)_r f, g (x)_r g> = ||f (x)_{p-r} g||^2 up to pairing with itself
      double lhs = frobenius_dot(contract(f, f, r), contract(g, g, r));
      double rhs = frobenius_norm_sq(contract(f, g, 3 - r));
      REQUIRE(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
    ContractionTensor t = contract(f, g, 1);
    REQUIRE(kernel_norm(symmetrize(t)) <= frobenius_norm(t) + 1e-10);
  }
}

TEST_CASE("H-valued kernels") {
  Kernel k = Kernel::zero(2, 2, 3);
  k.component(1) = pure_h1h1();
  k.component(3) = sym_h1h2();
  SUBCASE("component extraction") {
    CHECK(k.component(1).at({1, 1}) == doctest::Approx(1.0));
    CHECK(k.component(2).empty());
    CHECK_THROWS_AS(k.component(4), std::invalid_argument);
  }
  SUBCASE("Parseval over components") {
    CHECK(k.norm_sq() == doctest::Approx(2.0));
  }
  SUBCASE("contraction profile") {
    auto profile = contraction_profile(k);
    CHECK(profile.at({1, 1}) == doctest::Approx(1.0));
    CHECK(profile.at({3, 1}) == doctest::Approx(std::sqrt(0.5)));
    Kernel k1 = Kernel::zero(1, 2, 2);
    k1.component(1).add({1}, 1.0);
    CHECK(contraction_profile(k1).empty());
  }
  SUBCASE("profile scales quadratically") {
    Kernel scaled = k;
    for (int i = 1; i <= 3; ++i) scaled.component(i) = scale(scaled.component(i), 3.0);
    auto p0 = contraction_profile(k);
    auto p1 = contraction_profile(scaled);
    for (const auto& [key, v] : p0)
      CHECK(p1.at(key) == doctest::Approx(9.0 * v).epsilon(1e-12));
  }
}

TEST_CASE("kernel and expansion JSON") {
  nlohmann::json kj{{"p", 2}, {"hdim", 2}, {"Hdim", 2},
                    {"coeffs", {{1, {1, 2}, 0.5}, {1, {2, 1}, 0.5}, {2, {1, 1}, 1.0}}}};
  Kernel k = kernel_from_json(kj);
  CHECK(k.component(1).at({1, 2}) == doctest::Approx(0.5));  // duplicates summed, then averaged
  CHECK(k.component(2).at({1, 1}) == doctest::Approx(1.0));

  ChaosExpansion f = ChaosExpansion::empty(2, 2);
  f.set_kernel(k);
  Kernel k1 = Kernel::zero(1, 2, 2);
  k1.component(2).add({1}, 2.0);
  f.set_kernel(k1);
  ChaosExpansion g = expansion_from_json(to_json(f));
  CHECK(g.max_order() == 2);
  CHECK(g.kernel(1)->component(2).at({1}) == doctest::Approx(2.0));
  CHECK(g.kernel(2)->component(1).at({1, 2}) == doctest::Approx(0.5));
  CHECK(g.kernel(3) == nullptr);
}
