// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>

namespace iesched {

struct ThermalUnit {
  double p_min, p_max;          // MW
  double ramp_up, ramp_down;    // MW/h
  double cost_a;                // $/MW^2 h
  double cost_b;                // $/MWh
  double cost_c;                // $/h
  double reserve_cost;          // $/MWh

  ThermalUnit(double pmin, double pmax, double rup, double rdn, double a, double b,
              double c, double omega)
      : p_min(pmin), p_max(pmax), ramp_up(rup), ramp_down(rdn), cost_a(a), cost_b(b),
        cost_c(c), reserve_cost(omega) {
    if (!(0.0 <= p_min && p_min <= p_max))
      throw std::invalid_argument("ThermalUnit: need 0 <= p_min <= p_max");
    if (!(ramp_up > 0.0 && ramp_down > 0.0))
      throw std::invalid_argument("ThermalUnit: ramp rates must be positive");
    if (cost_a < 0.0)
      throw std::invalid_argument("ThermalUnit: quadratic cost must be convex (a >= 0)");
  }
};

// Heat storage tank. Sign convention follows the tank balance
// C_t = C_{t-1} - p_c * dt: POSITIVE p_c RELEASES heat to the network,
// negative p_c stores. This is the reverse of the battery convention below.
struct Hst {
  double c_min, c_max;  // MWh
  double p_c_max;       // MW, symmetric charge/discharge bound

  Hst(double cmin, double cmax, double pmax) : c_min(cmin), c_max(cmax), p_c_max(pmax) {
    if (!(0.0 <= c_min && c_min < c_max))
      throw std::invalid_argument("Hst: need 0 <= c_min < c_max");
    if (!(p_c_max > 0.0)) throw std::invalid_argument("Hst: transfer bound must be positive");
  }
};

// Extraction-type CHP unit. c_m is the heat-to-power slope of the lower
// feasible-region boundary; it is only enforced when backpressure_k is set,
// as the row p_e >= c_m * p_h^r - k.
struct ChpUnit {
  double pe_min, pe_max;        // MW electric
  double ph_max;                // MW heat extraction ceiling
  double c_v;                   // electric power lost per MW of extraction
  double c_m;                   // stored; used only via backpressure_k
  double ramp_up, ramp_down;    // MW/h on electric output
  double cost_a, cost_b, cost_c;
  double reserve_cost;          // $/MWh
  std::optional<Hst> hst;
  std::optional<double> backpressure_k;

  ChpUnit(double pemin, double pemax, double phmax, double cv, double cm, double rup,
          double rdn, double a, double b, double c, double delta,
          std::optional<Hst> tank = std::nullopt,
          std::optional<double> bp_k = std::nullopt)
      : pe_min(pemin), pe_max(pemax), ph_max(phmax), c_v(cv), c_m(cm), ramp_up(rup),
        ramp_down(rdn), cost_a(a), cost_b(b), cost_c(c), reserve_cost(delta),
        hst(std::move(tank)), backpressure_k(bp_k) {
    if (!(0.0 <= pe_min && pe_min <= pe_max))
      throw std::invalid_argument("ChpUnit: need 0 <= pe_min <= pe_max");
    if (!(ph_max > 0.0)) throw std::invalid_argument("ChpUnit: heat ceiling must be positive");
    if (!(c_v > 0.0)) throw std::invalid_argument("ChpUnit: c_v must be positive");
    if (!(ramp_up > 0.0 && ramp_down > 0.0))
      throw std::invalid_argument("ChpUnit: ramp rates must be positive");
    if (cost_a < 0.0)
      throw std::invalid_argument("ChpUnit: quadratic cost must be convex (a >= 0)");
  }
};

struct Bess {
  double s_min, s_max;          // MWh
  double p_max;                 // MW, charge and discharge bound
  double eff_ch, eff_dc;        // fractions
  double cost_dc, cost_ch;      // $/MWh
  double reserve_cost;          // $/MWh

  Bess(double smin, double smax, double pmax, double ch, double dc, double cdc,
       double cch, double mu)
      : s_min(smin), s_max(smax), p_max(pmax), eff_ch(ch), eff_dc(dc), cost_dc(cdc),
        cost_ch(cch), reserve_cost(mu) {
    if (!(0.0 <= s_min && s_min < s_max))
      throw std::invalid_argument("Bess: need 0 <= s_min < s_max");
    if (!(0.0 < eff_ch && eff_ch <= 1.0) || !(0.0 < eff_dc && eff_dc <= 1.0))
      throw std::invalid_argument("Bess: efficiencies must lie in (0, 1]");
    if (!(p_max > 0.0)) throw std::invalid_argument("Bess: power bound must be positive");
  }
};

struct Eb {
  double p_eb_max;  // MW electric input bound
  double eff;       // electric-to-heat conversion

  Eb(double pmax, double eta) : p_eb_max(pmax), eff(eta) {
    if (!(p_eb_max > 0.0)) throw std::invalid_argument("Eb: power bound must be positive");
    if (!(0.0 < eff && eff <= 1.0))
      throw std::invalid_argument("Eb: efficiency must lie in (0, 1]");
  }
};

// Electric power an extraction unit would produce in condensing mode.
inline double chp_condensing_power(const ChpUnit& u, double p_e, double p_h) {
  return p_e + u.c_v * p_h;
}

inline double eb_heat_output(const Eb& e, double p_elec) {
  if (!(0.0 <= p_elec && p_elec <= e.p_eb_max))
    throw std::invalid_argument("eb_heat_output: electric input out of range");
  return p_elec * e.eff;
}

// Battery state after one step. Charging loses eff_ch on the way in,
// discharging draws p_dc/eff_dc from storage. Bound enforcement belongs to
// the scheduler constraints, not here.
inline double bess_step(const Bess& b, double s_prev, double p_ch, double p_dc,
                        double dt_h) {
  return s_prev + (b.eff_ch * p_ch - p_dc / b.eff_dc) * dt_h;
}

// Tank state after one step; positive p_c releases (drains the tank).
inline double hst_step(const Hst&, double c_prev, double p_c, double dt_h) {
  return c_prev - p_c * dt_h;
}

}  // namespace iesched
