// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "iesched/special.hpp"

namespace iesched {

// Discrete probability mass on the uniform power grid {0, q, 2q, ...}.
// Entry i holds the probability of the output window centered at i*q.
// Sequences are immutable after construction and safe to share across
// threads.
class ProbSeq {
 public:
  // Tolerance on the raw mass before renormalization; a larger deviation
  // indicates a broken discretization and is rejected outright so that
  // silent corrections cannot mask quadrature bugs.
  static constexpr double kRawSumTol = 1e-6;

  ProbSeq(double step_q, std::vector<double> probs)
      : ProbSeq(step_q, std::move(probs), true) {}

  // Keeps the mass exactly as given (still validated). Used where the result
  // of an exact arithmetic operation must not be perturbed.
  static ProbSeq exact(double step_q, std::vector<double> probs) {
    return ProbSeq(step_q, std::move(probs), false);
  }

  double step_q() const { return q_; }
  std::size_t size() const { return p_.size(); }        // N + 1 entries
  std::size_t max_index() const { return p_.size() - 1; }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }

  // sum_i i*q*p[i]
  double expectation() const {
    double e = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) e += static_cast<double>(i) * q_ * p_[i];
    return e;
  }

  // sum of p[m..N], accumulated from the top so small tails stay accurate
  double tail_sum(std::size_t m) const {
    double t = 0.0;
    for (std::size_t i = p_.size(); i-- > m;) t += p_[i];
    return t;
  }

 private:
  ProbSeq(double step_q, std::vector<double> probs, bool renormalize)
      : q_(step_q), p_(std::move(probs)) {
    if (!(q_ > 0.0) || !std::isfinite(q_))
      throw std::invalid_argument("ProbSeq: step q must be positive and finite");
    if (p_.empty()) throw std::invalid_argument("ProbSeq: empty mass vector");
    double sum = 0.0;
    for (double& v : p_) {
      if (!std::isfinite(v) || v < -1e-12)
        throw std::invalid_argument("ProbSeq: negative or non-finite probability");
      if (v < 0.0) v = 0.0;  // clamp quadrature dust
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kRawSumTol)
      throw std::invalid_argument("ProbSeq: raw mass deviates from 1 beyond tolerance");
    if (renormalize)
      for (double& v : p_) v /= sum;
  }

  double q_;
  std::vector<double> p_;
};

inline double expectation(const ProbSeq& s) { return s.expectation(); }

// Wind turbine fleet driven by Weibull(shape_m, scale_eps) wind speed through
// the usual piecewise-linear speed-to-power conversion.
struct WindParams {
  double v_in;       // cut-in speed, m/s
  double v_s;        // rated speed, m/s
  double v_out;      // cut-out speed, m/s
  double p_s;        // rated power, MW
  double shape_m;    // Weibull shape
  double scale_eps;  // Weibull scale, m/s

  WindParams(double v_in_, double v_s_, double v_out_, double p_s_, double shape,
             double scale)
      : v_in(v_in_), v_s(v_s_), v_out(v_out_), p_s(p_s_), shape_m(shape), scale_eps(scale) {
    if (!(0.0 < v_in && v_in < v_s && v_s < v_out))
      throw std::invalid_argument("WindParams: need 0 < v_in < v_s < v_out");
    if (!(p_s > 0.0)) throw std::invalid_argument("WindParams: rated power must be positive");
    if (!(shape_m > 0.0) || !(scale_eps > 0.0))
      throw std::invalid_argument("WindParams: Weibull parameters must be positive");
  }

  // P(V > v) for the underlying wind speed.
  double speed_survival(double v) const { return std::exp(-std::pow(v / scale_eps, shape_m)); }
};

// PV plant whose output is Beta(lambda1, lambda2) scaled to p_max_pv.
struct PvParams {
  double lambda1;
  double lambda2;
  double p_max_pv;  // MW

  PvParams(double l1, double l2, double p_max)
      : lambda1(l1), lambda2(l2), p_max_pv(p_max) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
      throw std::invalid_argument("PvParams: Beta shapes must be positive");
    if (!(p_max_pv > 0.0))
      throw std::invalid_argument("PvParams: maximum power must be positive");
  }

  // Peak power folded from irradiance ceiling, active area and efficiency.
  static PvParams from_irradiance(double r_max, double area_m2, double efficiency,
                                  double l1, double l2) {
    return PvParams(l1, l2, r_max * area_m2 * efficiency);
  }
};

// Cumulative distribution of wind power output. Mass sits at 0 (below cut-in
// plus beyond cut-out), on the linear conversion ramp, and at rated power.
inline double wind_power_cdf(const WindParams& w, double p) {
  if (!std::isfinite(p)) throw std::invalid_argument("wind_power_cdf: power must be finite");
  if (p < 0.0) return 0.0;
  if (p >= w.p_s) return 1.0;
  const double h = w.v_s / w.v_in - 1.0;
  const double v = (1.0 + h * p / w.p_s) * w.v_in;
  return 1.0 - w.speed_survival(v) + w.speed_survival(w.v_out);
}

// Raw (unnormalized) bin masses for wind power on the grid
// {0, q, ..., N*q}, N = ceil(p_s/q). Bin i collects the half-open window
// [i*q - q/2, i*q + q/2) clipped to the support, so the atoms at 0 and at
// rated power land in the windows that contain them.
inline std::vector<double> wind_bin_masses(const WindParams& w, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("discretize_wind: q must be positive");
  const double atom_zero = (1.0 - w.speed_survival(w.v_in)) + w.speed_survival(w.v_out);
  const double atom_rated = w.speed_survival(w.v_s) - w.speed_survival(w.v_out);
  const double h = w.v_s / w.v_in - 1.0;
  // P(0 < W <= x): the continuous ramp region.
  auto ramp_cdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    if (x > w.p_s) x = w.p_s;
    const double v = (1.0 + h * x / w.p_s) * w.v_in;
    return w.speed_survival(w.v_in) - w.speed_survival(v);
  };
  const auto n = static_cast<std::size_t>(std::ceil(w.p_s / q));
  std::vector<double> mass(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double lo = static_cast<double>(i) * q - 0.5 * q;
    const double hi = static_cast<double>(i) * q + 0.5 * q;
    double m = ramp_cdf(hi) - ramp_cdf(lo);
    if (lo <= 0.0 && 0.0 < hi) m += atom_zero;
    if (lo <= w.p_s && w.p_s < hi) m += atom_rated;
    mass[i] = m;
  }
  return mass;
}

inline ProbSeq discretize_wind(const WindParams& w, double q) {
  return ProbSeq(q, wind_bin_masses(w, q));
}

// Raw (unnormalized) bin masses for PV power on the grid {0, q, ..., N*q},
// N = ceil(p_max/q). Masses are differences of the regularized incomplete
// beta CDF, which stays well behaved for shape parameters below 1 where the
// density blows up at the endpoints.
inline std::vector<double> pv_bin_masses(const PvParams& p, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("discretize_pv: q must be positive");
  auto cdf = [&](double x) {
    const double u = std::clamp(x / p.p_max_pv, 0.0, 1.0);
    return reg_inc_beta(p.lambda1, p.lambda2, u);
  };
  const auto n = static_cast<std::size_t>(std::ceil(p.p_max_pv / q));
  std::vector<double> mass(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const double lo = static_cast<double>(i) * q - 0.5 * q;
    const double hi = static_cast<double>(i) * q + 0.5 * q;
    mass[i] = cdf(hi) - cdf(lo);
  }
  return mass;
}

inline ProbSeq discretize_pv(const PvParams& p, double q) {
  return ProbSeq(q, pv_bin_masses(p, q));
}

// Distribution of the sum of two independent sequences on the same grid.
// Plain double sum; any optimized variant must reproduce it term for term.
inline ProbSeq convolve(const ProbSeq& a, const ProbSeq& b) {
  if (a.step_q() != b.step_q())
    throw std::invalid_argument("convolve: step mismatch (no implicit resampling)");
  const auto& pa = a.probs();
  const auto& pb = b.probs();
  std::vector<double> c(pa.size() + pb.size() - 1, 0.0);
  for (std::size_t j = 0; j < pa.size(); ++j)
    for (std::size_t k = 0; k < pb.size(); ++k) c[j + k] += pa[j] * pb[k];
  return ProbSeq::exact(a.step_q(), std::move(c));
}

// Minimal reserve R >= 0 such that the joint-output tail at the implied
// shortfall grid point still carries probability alpha. Equivalently
// R = max(0, e_t - m_alpha*q) with m_alpha the largest m whose upper tail
// sum is at least alpha.
inline double quantile_reserve(const ProbSeq& s, double alpha, double e_t) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("quantile_reserve: alpha must lie in (0, 1]");
  double tail = 0.0;
  std::size_t m_alpha = 0;
  for (std::size_t m = s.size(); m-- > 0;) {
    tail += s[m];
    if (tail >= alpha - 1e-12) {
      m_alpha = m;
      break;
    }
  }
  return std::max(0.0, e_t - static_cast<double>(m_alpha) * s.step_q());
}

}  // namespace iesched
