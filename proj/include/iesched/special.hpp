// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

namespace iesched {

namespace detail {

// Continued-fraction kernel of the regularized incomplete beta function
// (modified Lentz iteration).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b), i.e. the Beta(a, b) CDF.
inline double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("reg_inc_beta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::beta_cf(a, b, x) / a;
  return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Beta(a, b) density on (0, 1); zero outside the open interval.
inline double beta_pdf(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
  return std::exp(ln);
}

// Inverse Beta CDF: the x with I_x(a, b) = p, found by bracketed Newton.
// Deterministic and accurate to ~1e-14 in probability.
inline double inv_reg_inc_beta(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("inv_reg_inc_beta: p must lie in [0, 1]");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_beta(a, b, x) - p;
    if (f > 0.0) hi = x;
    else lo = x;
    if (std::fabs(f) < 1e-14 || hi - lo < 1e-15) break;
    const double g = beta_pdf(a, b, x);
    double next = (g > 0.0) ? x - f / g : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace iesched
