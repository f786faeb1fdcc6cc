#pragma once

#include <cmath>

namespace familia {

// Smallest weight a degenerate density is allowed to contribute; keeps
// log-space math finite without letting impossible candidates win.
inline constexpr double kTinyWeight = 1e-300;

inline double log_gaussian_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

inline double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Supervised response density N(y | mu, sigma2).  A perfectly fit regression
// can drive sigma2 to exactly 0; the density then degenerates to an
// indicator, which we realize with a tolerance so float noise in mu does not
// zero out the true assignment.
inline double log_response_pdf(double y, double mu, double sigma2) {
  if (sigma2 <= 0.0) {
    return std::fabs(y - mu) < 1e-9 ? 0.0 : std::log(kTinyWeight);
  }
  return log_gaussian_pdf(y, mu, sigma2);
}

}  // namespace familia
