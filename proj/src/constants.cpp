#include "fmcert/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace fmcert {

namespace {

using u128 = unsigned __int128;

u128 checked_mul(u128 a, u128 b) {
  if (a != 0 && b > ~u128{0} / a)
    throw std::overflow_error("constant exceeds 128-bit integer range");
  return a * b;
}

u128 factorial_u128(int n) {
  if (n < 0) throw std::invalid_argument("factorial of negative argument");
  u128 acc = 1;
  for (int k = 2; k <= n; ++k) acc = checked_mul(acc, static_cast<u128>(k));
  return acc;
}

u128 binomial_u128(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  u128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = checked_mul(acc, static_cast<u128>(n - k + i));
    acc /= static_cast<u128>(i);
  }
  return acc;
}

double to_double(u128 v) { return static_cast<double>(v); }

}  // namespace

double exact_factorial(int n) { return to_double(factorial_u128(n)); }

double exact_binomial(int n, int k) { return to_double(binomial_u128(n, k)); }

double constant_cp(int p, int r) {
  if (r < 1 || r > p - 1) throw std::invalid_argument("constant_cp needs 1 <= r <= p-1");
  u128 b = binomial_u128(p - 1, r - 1);
  u128 integer_part = checked_mul(checked_mul(static_cast<u128>(p), factorial_u128(r - 1)),
                                  checked_mul(b, b));
  return to_double(integer_part) * std::sqrt(to_double(factorial_u128(2 * p - 2 * r)));
}

double constant_cpq(int p, int q) {
  if (p < 1 || p >= q) throw std::invalid_argument("constant_cpq needs 1 <= p < q");
  u128 f = factorial_u128(p);
  u128 b = binomial_u128(q - 1, p - 1);
  return to_double(checked_mul(checked_mul(checked_mul(f, f), checked_mul(b, b)),
                               factorial_u128(q - p)));
}

double constant_cpqchi(int p, int q, int chi) {
  if (p < 1 || p > q) throw std::invalid_argument("constant_cpqchi needs 1 <= p <= q");
  if (chi < 1 || chi > p - 1)
    throw std::invalid_argument("constant_cpqchi needs 1 <= chi <= p-1");
  u128 f = factorial_u128(chi - 1);
  u128 bp = binomial_u128(p - 1, chi - 1);
  u128 bq = binomial_u128(q - 1, chi - 1);
  u128 acc = checked_mul(checked_mul(f, f), checked_mul(bp, bp));
  acc = checked_mul(acc, checked_mul(bq, bq));
  acc = checked_mul(acc, factorial_u128(p + q - 2 * chi));
  acc = checked_mul(acc, static_cast<u128>(p) * static_cast<u128>(p));
  return to_double(acc) / 2.0;
}

}  // namespace fmcert
