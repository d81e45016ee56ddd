#pragma once

#include <cmath>
#include <cstddef>

namespace sensauth {

struct RateCi {
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion.
inline RateCi wilson_interval(std::size_t successes, std::size_t trials,
                              double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, center - half, center + half};
}

}  // namespace sensauth
