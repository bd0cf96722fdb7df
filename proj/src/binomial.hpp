#pragma once

#include <algorithm>
#include <cmath>

namespace divrec::detail {

inline double binomial_pmf(int n, int r, double p) {
  if (r < 0 || r > n) return 0.0;
  if (p <= 0.0) return r == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return r == n ? 1.0 : 0.0;
  double log_pmf = std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0) +
                   r * std::log(p) + (n - r) * std::log1p(-p);
  return std::exp(log_pmf);
}

/// P[Binomial(n, p) <= r_max].
inline double binomial_cdf(int n, double p, int r_max) {
  if (r_max < 0) return 0.0;
  if (r_max >= n) return 1.0;
  double total = 0.0;
  for (int r = 0; r <= r_max; ++r) total += binomial_pmf(n, r, p);
  return std::min(total, 1.0);
}

}  // namespace divrec::detail
