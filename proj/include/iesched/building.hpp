// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

namespace iesched {

// Aggregate single-zone building envelope. The mixed SI inputs are
// converted once here; everything downstream works in MW, MWh and hours.
struct BuildingParams {
  double k_transfer_w_m2c;  // heat transfer coefficient, W/(m^2 degC)
  double surface_f_m2;
  double volume_v_m3;
  double c_air_kj_kgc;      // specific heat of indoor air, kJ/(kg degC)
  double rho_air_kg_m3;

  BuildingParams(double k, double f, double v, double c_air, double rho_air)
      : k_transfer_w_m2c(k),
        surface_f_m2(f),
        volume_v_m3(v),
        c_air_kj_kgc(c_air),
        rho_air_kg_m3(rho_air) {
    if (!(k > 0.0 && f > 0.0 && v > 0.0 && c_air > 0.0 && rho_air > 0.0))
      throw std::invalid_argument("BuildingParams: all parameters must be positive");
    if (!std::isfinite(time_constant_h()) || !(time_constant_h() > 0.0))
      throw std::invalid_argument("BuildingParams: degenerate time constant");
  }

  // Envelope loss coefficient K*F in MW per degC.
  double loss_mw_per_c() const { return k_transfer_w_m2c * surface_f_m2 * 1e-6; }

  // Thermal capacity c*rho*V in MWh per degC.
  double capacity_mwh_per_c() const {
    return c_air_kj_kgc * rho_air_kg_m3 * volume_v_m3 / 3.6e6;
  }

  double time_constant_h() const { return capacity_mwh_per_c() / loss_mw_per_c(); }

  // Fraction of a temperature offset surviving dt hours: e^{-dt/tau}.
  double decay(double dt_h) const { return std::exp(-dt_h / time_constant_h()); }
};

// Trapezoidal comfort membership: rises on [t_a, t_b], is 1 on [t_b, t_c],
// falls on [t_c, t_d]. The plateau is the comfort range used by the
// scheduler.
struct ComfortBand {
  double t_a, t_b, t_c, t_d;

  ComfortBand(double a, double b, double c, double d) : t_a(a), t_b(b), t_c(c), t_d(d) {
    if (!(a <= b && b <= c && c <= d))
      throw std::invalid_argument("ComfortBand: breakpoints must be ordered");
  }
};

inline double comfort_membership(const ComfortBand& band, double t) {
  if (t < band.t_a || t > band.t_d) return 0.0;
  if (t >= band.t_b && t <= band.t_c) return 1.0;
  if (t < band.t_b) return (t - band.t_a) / (band.t_b - band.t_a);
  return (band.t_d - t) / (band.t_d - band.t_c);
}

// Indoor temperature after one step of length dt under constant heating
// power and outdoor temperature: exponential relaxation toward the
// equilibrium T_od + P/(K*F).
inline double indoor_temp_step(const BuildingParams& p, double t_id_prev, double t_od,
                               double p_heat_mw, double dt_h) {
  if (!(dt_h > 0.0)) throw std::invalid_argument("indoor_temp_step: dt must be positive");
  const double t_eq = t_od + p_heat_mw / p.loss_mw_per_c();
  return t_eq + (t_id_prev - t_eq) * p.decay(dt_h);
}

// The unique heating power that drives the room from t_id_prev to t_id_now
// in dt hours; exact algebraic inverse of indoor_temp_step, affine in all
// three temperatures (which is what lets it enter the MILP as a linear row).
// Negative results indicate cooling demand and are left to the caller.
inline double heating_demand(const BuildingParams& p, double t_id_now, double t_id_prev,
                             double t_od, double dt_h) {
  if (!(dt_h > 0.0)) throw std::invalid_argument("heating_demand: dt must be positive");
  const double e = p.decay(dt_h);
  return p.loss_mw_per_c() * (t_id_now - e * t_id_prev - (1.0 - e) * t_od) / (1.0 - e);
}

}  // namespace iesched
