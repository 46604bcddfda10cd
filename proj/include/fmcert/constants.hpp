#pragma once

namespace fmcert {

/// Exact n! as double; throws std::overflow_error once the exact integer
/// value no longer fits in 128 bits (n > 33).
double exact_factorial(int n);

/// Exact binomial coefficient C(n, k) as double.
double exact_binomial(int n, int k);

/// c_p(r) = p (r-1)! C(p-1, r-1)^2 sqrt((2p - 2r)!), for 1 <= r <= p - 1.
double constant_cp(int p, int r);

/// c(p, q) = (p!)^2 C(q-1, p-1)^2 (q - p)!, for p < q.
double constant_cpq(int p, int q);

/// c(p, q, chi) = (p^2 / 2) ((chi-1)!)^2 C(p-1, chi-1)^2 C(q-1, chi-1)^2
/// (p + q - 2 chi)!, for p <= q and 1 <= chi <= p - 1.
double constant_cpqchi(int p, int q, int chi);

}  // namespace fmcert
