// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "iesched/building.hpp"
#include "iesched/devices.hpp"
#include "iesched/milp.hpp"
#include "iesched/probseq.hpp"
#include "iesched/scenario.hpp"

namespace iesched {

// ---------------------------------------------------------------------------
// Piecewise-linear epigraph of a convex quadratic cost
// ---------------------------------------------------------------------------

struct PwlSegment {
  double slope;      // $/MWh
  double intercept;  // $/h
};

// k secant segments through k+1 equally spaced breakpoints of
// f(P) = a P^2 + b P + c on [p_min, p_max]. Secants over a convex parabola
// over-approximate f between breakpoints by at most a*((p_max-p_min)/k)^2/4
// and are exact at the breakpoints, so the epigraph max of the segments is a
// faithful linearization.
inline std::vector<PwlSegment> pwl_segments(double a, double b, double c, double p_min,
                                            double p_max, int k) {
  if (a < 0.0) throw std::invalid_argument("pwl_segments: cost must be convex (a >= 0)");
  if (k < 1) throw std::invalid_argument("pwl_segments: need at least one segment");
  if (!(p_min < p_max)) throw std::invalid_argument("pwl_segments: empty range");
  auto f = [&](double p) { return a * p * p + b * p + c; };
  if (a == 0.0) return {PwlSegment{b, c}};
  std::vector<PwlSegment> out;
  out.reserve(static_cast<std::size_t>(k));
  const double step = (p_max - p_min) / k;
  for (int j = 0; j < k; ++j) {
    const double p0 = p_min + j * step;
    const double p1 = p_min + (j + 1) * step;
    const double slope = (f(p1) - f(p0)) / (p1 - p0);  // = a*(p0+p1) + b
    out.push_back(PwlSegment{slope, f(p0) - slope * p0});
  }
  return out;
}

// Over-approximation bound of the secant PWL for one unit over one period.
inline double pwl_gap_bound(double a, double p_min, double p_max, int k) {
  if (a == 0.0) return 0.0;
  const double step = (p_max - p_min) / k;
  return a * step * step / 4.0;
}

// Exact quadratic value, used when reporting true costs next to the PWL
// surrogate the solver optimized.
inline double quad_cost(double a, double b, double c, double p) {
  return a * p * p + b * p + c;
}

inline double quad_min_on(double a, double b, double c, double p_min, double p_max) {
  double best = std::min(quad_cost(a, b, c, p_min), quad_cost(a, b, c, p_max));
  if (a > 0.0) {
    const double v = -b / (2.0 * a);
    if (v > p_min && v < p_max) best = std::min(best, quad_cost(a, b, c, v));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Chance-constraint deterministic equivalent
// ---------------------------------------------------------------------------

// Emits, for each grid point m of the joint-output sequence, a binary z_m
// tied to "total reserve covers the shortfall down to output m*q" through
// the two big-L inequalities, plus the coverage row sum_m c(m) z_m >= alpha
// and the (redundant but tightening) chain z_m <= z_{m+1}.
//
// big_l is the caller's globally safe constant (it must dominate any
// feasible |sum R + m q - e_t|). The upper inequality additionally shrinks
// its own L to the smallest per-row valid value max(e_t - m q, q): the
// binary solution set is unchanged, but the LP relaxation tightens from a
// big-L cloud to (almost) the indicator form, which keeps branch and bound
// shallow. Returns the z variable ids, one per grid point.
inline std::vector<int> chance_constraint_rows(milp::MilpModel& model,
                                               const ProbSeq& c_seq,
                                               const std::vector<milp::LinTerm>& reserve,
                                               double e_t, double alpha, double big_l,
                                               const std::string& tag) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("chance_constraint_rows: alpha must lie in (0, 1]");
  if (!(big_l > 0.0)) throw std::invalid_argument("chance_constraint_rows: big_l must be positive");
  const double q = c_seq.step_q();
  std::vector<int> z;
  z.reserve(c_seq.size());
  for (std::size_t m = 0; m < c_seq.size(); ++m)
    z.push_back(model.add_binary("z_" + tag + "_m" + std::to_string(m)));
  for (std::size_t m = 0; m < c_seq.size(); ++m) {
    const double mq = static_cast<double>(m) * q;
    // sum R + m q - e_t <= L z_m
    auto lhs = reserve;
    lhs.push_back({z[m], -big_l});
    model.add_constraint("zlo_" + tag + "_m" + std::to_string(m), std::move(lhs),
                         milp::Sense::LE, e_t - mq);
    // L' z_m <= L' + sum R + m q - e_t  with the smallest valid L'
    const double l_hi = std::max(e_t - mq, q);
    std::vector<milp::LinTerm> rhs{{z[m], l_hi}};
    for (const auto& t : reserve) rhs.push_back({t.var, -t.coef});
    model.add_constraint("zhi_" + tag + "_m" + std::to_string(m), std::move(rhs),
                         milp::Sense::LE, l_hi + mq - e_t);
  }
  for (std::size_t m = 0; m + 1 < c_seq.size(); ++m)
    model.add_constraint("zmono_" + tag + "_m" + std::to_string(m),
                         {{z[m], 1.0}, {z[m + 1], -1.0}}, milp::Sense::LE, 0.0);
  // mixing ("star") row: with tau_m = max(e_t - m q, 0), every integral
  // covering pattern satisfies sum R >= sum_m (tau_m - tau_{m+1}) z_m with
  // equality at the telescoped reserve floor, so this valid row removes the
  // fractional coverage credit the plain big-L relaxation leaks
  {
    std::vector<milp::LinTerm> star = reserve;
    for (std::size_t m = 0; m < c_seq.size(); ++m) {
      const double tau_m = std::max(e_t - static_cast<double>(m) * q, 0.0);
      const double tau_n = std::max(e_t - static_cast<double>(m + 1) * q, 0.0);
      const double w = tau_m - tau_n;
      if (w > 1e-12) star.push_back({z[m], -w});
    }
    model.add_constraint("zstar_" + tag, std::move(star), milp::Sense::GE, 0.0);
  }
  std::vector<milp::LinTerm> cov;
  cov.reserve(z.size());
  // negligible masses would put 1e-16-scale coefficients next to O(1) ones;
  // dropping them changes the row by less than any tolerance in play
  for (std::size_t m = 0; m < c_seq.size(); ++m)
    if (c_seq[m] >= 1e-12) cov.push_back({z[m], c_seq[m]});
  model.add_constraint("zcov_" + tag, std::move(cov), milp::Sense::GE, alpha);
  return z;
}

// ---------------------------------------------------------------------------
// Full model assembly
// ---------------------------------------------------------------------------

// Variable ids per period; -1 marks an absent feature.
struct ModelLayout {
  std::vector<std::vector<int>> th_p, th_r, th_cost;
  std::vector<std::vector<int>> chp_pe, chp_phr, chp_phc, chp_c, chp_re, chp_cost;
  std::vector<int> bess_ch, bess_dc, bess_s, bess_r, bess_y;
  std::vector<int> eb_p, pc, tid, pheat;
  std::vector<std::vector<int>> z;
};

struct BuiltModel {
  milp::MilpModel model;
  ModelLayout layout;
  std::vector<ProbSeq> joint;        // per-period wind (+) pv distribution
  std::vector<double> e_t;           // its expectation
  std::vector<double> heat_static;   // fixed heating load when inertia is off
  std::vector<double> reserve_rhs;   // quantile/deterministic reserve floor
  std::vector<double> big_l;         // per-period big-L (binary formulation)
};

// Variable census, period by period:
//   3 per thermal unit (output, reserve, cost epigraph)
//   4 per CHP unit (electric, extraction heat, reserve, cost epigraph)
//     +2 per CHP with a tank (transfer power, stored energy)
//   5 for the BESS (charge, discharge, state, reserve, exclusion binary)
//   1 for the boiler, 1 for renewable consumption
//   2 when inertia is on (indoor temperature, heating power)
//   N_ct(t)+1 coverage binaries (binary formulation with uncertainty on)
inline long expected_variable_count(const Scenario& s,
                                    const std::vector<ProbSeq>& joint) {
  long per = 3 * static_cast<long>(s.thermal_units.size());
  for (const auto& u : s.chp_units) per += u.hst ? 6 : 4;
  if (s.bess) per += 5;
  if (s.eb) per += 1;
  per += 1;  // renewable consumption
  if (s.feat.thermal_inertia) per += 2;
  long total = per * s.horizon;
  if (s.feat.uncertainty && s.chance == ChanceFormulation::kBinary)
    for (const auto& c : joint) total += static_cast<long>(c.size());
  return total;
}

// Per-period distribution of the combined renewable output.
inline std::vector<ProbSeq> joint_sequences(const Scenario& s) {
  std::vector<ProbSeq> joint;
  joint.reserve(static_cast<std::size_t>(s.horizon));
  for (int t = 0; t < s.horizon; ++t) {
    auto w = discretize_wind(s.wind[static_cast<std::size_t>(t)], s.q_step_mw);
    auto p = discretize_pv(s.pv[static_cast<std::size_t>(t)], s.q_step_mw);
    joint.push_back(convolve(w, p));
  }
  return joint;
}

inline BuiltModel build(const Scenario& s) {
  s.validate();
  BuiltModel out;
  auto& model = out.model;
  auto& L = out.layout;
  const int T = s.horizon;
  const double dt = s.dt_h;

  out.joint = joint_sequences(s);
  for (const auto& c : out.joint) out.e_t.push_back(c.expectation());

  const auto& bld = *s.building;
  const auto& band = *s.comfort;
  const double kf = bld.loss_mw_per_c();
  const double decay = bld.decay(dt);
  const double beta = kf / (1.0 - decay);
  if (!s.feat.thermal_inertia) {
    for (int t = 0; t < T; ++t)
      out.heat_static.push_back(
          std::max(0.0, kf * (s.setpoint_c - s.t_outdoor_c[static_cast<std::size_t>(t)])));
  }

  double reserve_cap = 0.0;
  for (const auto& u : s.thermal_units) reserve_cap += u.p_max - u.p_min;
  for (const auto& u : s.chp_units) reserve_cap += u.pe_max - u.pe_min;
  if (s.bess) reserve_cap += s.bess->p_max;

  const auto nth = s.thermal_units.size();
  const auto nchp = s.chp_units.size();
  auto resize_layout = [&](auto& v) { v.assign(static_cast<std::size_t>(T), {}); };
  resize_layout(L.th_p); resize_layout(L.th_r); resize_layout(L.th_cost);
  resize_layout(L.chp_pe); resize_layout(L.chp_phr); resize_layout(L.chp_phc);
  resize_layout(L.chp_c); resize_layout(L.chp_re); resize_layout(L.chp_cost);
  resize_layout(L.z);
  L.bess_ch.assign(static_cast<std::size_t>(T), -1);
  L.bess_dc.assign(static_cast<std::size_t>(T), -1);
  L.bess_s.assign(static_cast<std::size_t>(T), -1);
  L.bess_r.assign(static_cast<std::size_t>(T), -1);
  L.bess_y.assign(static_cast<std::size_t>(T), -1);
  L.eb_p.assign(static_cast<std::size_t>(T), -1);
  L.pc.assign(static_cast<std::size_t>(T), -1);
  L.tid.assign(static_cast<std::size_t>(T), -1);
  L.pheat.assign(static_cast<std::size_t>(T), -1);

  // thermal unit cost curves are shared across periods
  std::vector<std::vector<PwlSegment>> th_pwl, chp_pwl;
  std::vector<double> th_cost_lb, chp_cost_lb;
  std::vector<std::pair<double, double>> chp_xrange;
  for (const auto& u : s.thermal_units) {
    th_pwl.push_back(pwl_segments(u.cost_a, u.cost_b, u.cost_c, u.p_min, u.p_max,
                                  s.pwl_segments_k));
    th_cost_lb.push_back(quad_min_on(u.cost_a, u.cost_b, u.cost_c, u.p_min, u.p_max));
  }
  for (const auto& u : s.chp_units) {
    const double phc_lo = u.hst ? -u.hst->p_c_max : 0.0;
    const double phc_hi = u.hst ? u.hst->p_c_max : 0.0;
    const double x_lo = u.pe_min + u.c_v * (0.0 + phc_lo);
    const double x_hi = u.pe_max + u.c_v * (u.ph_max + phc_hi);
    chp_xrange.emplace_back(x_lo, x_hi);
    chp_pwl.push_back(
        pwl_segments(u.cost_a, u.cost_b, u.cost_c, x_lo, x_hi, s.pwl_segments_k));
    chp_cost_lb.push_back(quad_min_on(u.cost_a, u.cost_b, u.cost_c, x_lo, x_hi));
  }

  auto pn = [](const char* stem, std::size_t i, int t) {
    return std::string(stem) + std::to_string(i + 1) + "_t" + std::to_string(t + 1);
  };

  // --- variables -----------------------------------------------------------
  for (int t = 0; t < T; ++t) {
    const auto ts = std::to_string(t + 1);
    for (std::size_t i = 0; i < nth; ++i) {
      const auto& u = s.thermal_units[i];
      L.th_p[t].push_back(model.add_variable(pn("th", i, t) + "_p", u.p_min, u.p_max));
      L.th_r[t].push_back(
          model.add_variable(pn("th", i, t) + "_r", 0.0, u.p_max - u.p_min));
      const int cv = model.add_variable(pn("th", i, t) + "_cost", th_cost_lb[i], milp::kInf);
      L.th_cost[t].push_back(cv);
      model.set_objective(cv, dt);  // epigraph variables carry $/h
      model.add_objective(L.th_r[t][i], u.reserve_cost * dt);
    }
    for (std::size_t i = 0; i < nchp; ++i) {
      const auto& u = s.chp_units[i];
      L.chp_pe[t].push_back(model.add_variable(pn("chp", i, t) + "_pe", u.pe_min, u.pe_max));
      L.chp_phr[t].push_back(model.add_variable(pn("chp", i, t) + "_phr", 0.0, u.ph_max));
      if (u.hst) {
        L.chp_phc[t].push_back(
            model.add_variable(pn("chp", i, t) + "_phc", -u.hst->p_c_max, u.hst->p_c_max));
        const double c_hi = (t + 1 == T) ? u.hst->c_min : u.hst->c_max;  // cyclic end state
        L.chp_c[t].push_back(
            model.add_variable(pn("chp", i, t) + "_c", u.hst->c_min, c_hi));
      } else {
        L.chp_phc[t].push_back(-1);
        L.chp_c[t].push_back(-1);
      }
      L.chp_re[t].push_back(
          model.add_variable(pn("chp", i, t) + "_re", 0.0, u.pe_max - u.pe_min));
      const int cv = model.add_variable(pn("chp", i, t) + "_cost", chp_cost_lb[i], milp::kInf);
      L.chp_cost[t].push_back(cv);
      model.set_objective(cv, dt);
      model.add_objective(L.chp_re[t][i], u.reserve_cost * dt);
    }
    if (s.bess) {
      const auto& b = *s.bess;
      L.bess_ch[t] = model.add_variable("bess_ch_t" + ts, 0.0, b.p_max);
      L.bess_dc[t] = model.add_variable("bess_dc_t" + ts, 0.0, b.p_max);
      const double s_hi = (t + 1 == T) ? b.s_min : b.s_max;  // cyclic end state
      L.bess_s[t] = model.add_variable("bess_s_t" + ts, b.s_min, s_hi);
      L.bess_r[t] = model.add_variable("bess_r_t" + ts, 0.0, b.p_max);
      L.bess_y[t] = model.add_binary("bess_y_t" + ts);
      model.add_objective(L.bess_dc[t], b.cost_dc * dt);
      model.add_objective(L.bess_ch[t], -b.cost_ch * dt);
      model.add_objective(L.bess_r[t], b.reserve_cost * dt);
    }
    if (s.eb) L.eb_p[t] = model.add_variable("eb_p_t" + ts, 0.0, s.eb->p_eb_max);
    L.pc[t] = model.add_variable("pc_t" + ts, 0.0, out.e_t[static_cast<std::size_t>(t)]);
    if (s.feat.thermal_inertia) {
      L.tid[t] = model.add_variable("bld_tid_t" + ts, band.t_b, band.t_c);
      L.pheat[t] = model.add_variable("bld_ph_t" + ts, 0.0, milp::kInf);
    }
  }

  // --- rows ----------------------------------------------------------------
  for (int t = 0; t < T; ++t) {
    const auto ts = std::to_string(t + 1);
    const auto tu = static_cast<std::size_t>(t);

    // electric balance: generation + discharge - charge - boiler = load
    {
      std::vector<milp::LinTerm> terms;
      for (std::size_t i = 0; i < nth; ++i) terms.push_back({L.th_p[t][i], 1.0});
      for (std::size_t i = 0; i < nchp; ++i) terms.push_back({L.chp_pe[t][i], 1.0});
      terms.push_back({L.pc[t], 1.0});
      if (s.bess) {
        terms.push_back({L.bess_dc[t], 1.0});
        terms.push_back({L.bess_ch[t], -1.0});
      }
      if (s.eb) terms.push_back({L.eb_p[t], -1.0});
      model.add_constraint("elec_t" + ts, std::move(terms), milp::Sense::EQ,
                           s.elec_load_mw[tu]);
    }

    // heat balance: CHP extraction + tank transfer + boiler heat = demand
    {
      std::vector<milp::LinTerm> terms;
      for (std::size_t i = 0; i < nchp; ++i) {
        terms.push_back({L.chp_phr[t][i], 1.0});
        if (L.chp_phc[t][i] >= 0) terms.push_back({L.chp_phc[t][i], 1.0});
      }
      if (s.eb) terms.push_back({L.eb_p[t], s.eb->eff});
      double rhs = 0.0;
      if (s.feat.thermal_inertia) terms.push_back({L.pheat[t], -1.0});
      else rhs = out.heat_static[tu];
      model.add_constraint("heat_t" + ts, std::move(terms), milp::Sense::EQ, rhs);
    }

    // indoor temperature dynamics as a linear row
    if (s.feat.thermal_inertia) {
      std::vector<milp::LinTerm> terms{{L.pheat[t], 1.0}, {L.tid[t], -beta}};
      double rhs = -kf * s.t_outdoor_c[tu];
      if (t == 0) rhs -= beta * decay * s.setpoint_c;
      else terms.push_back({L.tid[t - 1], beta * decay});
      model.add_constraint("bld_t" + ts, std::move(terms), milp::Sense::EQ, rhs);
    }

    // reserve headroom
    for (std::size_t i = 0; i < nth; ++i)
      model.add_constraint("thcap" + std::to_string(i + 1) + "_t" + ts,
                           {{L.th_p[t][i], 1.0}, {L.th_r[t][i], 1.0}}, milp::Sense::LE,
                           s.thermal_units[i].p_max);
    for (std::size_t i = 0; i < nchp; ++i)
      model.add_constraint("chpcap" + std::to_string(i + 1) + "_t" + ts,
                           {{L.chp_pe[t][i], 1.0}, {L.chp_re[t][i], 1.0}}, milp::Sense::LE,
                           s.chp_units[i].pe_max);

    // extraction backpressure floor, when enabled per unit
    for (std::size_t i = 0; i < nchp; ++i) {
      const auto& u = s.chp_units[i];
      if (u.backpressure_k)
        model.add_constraint("chpbp" + std::to_string(i + 1) + "_t" + ts,
                             {{L.chp_pe[t][i], 1.0}, {L.chp_phr[t][i], -u.c_m}},
                             milp::Sense::GE, -*u.backpressure_k);
    }

    // cost epigraphs
    for (std::size_t i = 0; i < nth; ++i) {
      int seg = 0;
      for (const auto& sgm : th_pwl[i])
        model.add_constraint(
            "thpwl" + std::to_string(i + 1) + "_s" + std::to_string(seg++) + "_t" + ts,
            {{L.th_cost[t][i], 1.0}, {L.th_p[t][i], -sgm.slope}}, milp::Sense::GE,
            sgm.intercept);
    }
    for (std::size_t i = 0; i < nchp; ++i) {
      const auto& u = s.chp_units[i];
      int seg = 0;
      for (const auto& sgm : chp_pwl[i]) {
        std::vector<milp::LinTerm> terms{{L.chp_cost[t][i], 1.0},
                                         {L.chp_pe[t][i], -sgm.slope},
                                         {L.chp_phr[t][i], -sgm.slope * u.c_v}};
        if (L.chp_phc[t][i] >= 0) terms.push_back({L.chp_phc[t][i], -sgm.slope * u.c_v});
        model.add_constraint(
            "chppwl" + std::to_string(i + 1) + "_s" + std::to_string(seg++) + "_t" + ts,
            std::move(terms), milp::Sense::GE, sgm.intercept);
      }
    }

    // ramps (from the second period on)
    if (t > 0) {
      for (std::size_t i = 0; i < nth; ++i) {
        const auto& u = s.thermal_units[i];
        model.add_constraint("thru" + std::to_string(i + 1) + "_t" + ts,
                             {{L.th_p[t][i], 1.0}, {L.th_p[t - 1][i], -1.0}},
                             milp::Sense::LE, u.ramp_up * dt);
        model.add_constraint("thrd" + std::to_string(i + 1) + "_t" + ts,
                             {{L.th_p[t][i], 1.0}, {L.th_p[t - 1][i], -1.0}},
                             milp::Sense::GE, -u.ramp_down * dt);
      }
      for (std::size_t i = 0; i < nchp; ++i) {
        const auto& u = s.chp_units[i];
        model.add_constraint("chpru" + std::to_string(i + 1) + "_t" + ts,
                             {{L.chp_pe[t][i], 1.0}, {L.chp_pe[t - 1][i], -1.0}},
                             milp::Sense::LE, u.ramp_up * dt);
        model.add_constraint("chprd" + std::to_string(i + 1) + "_t" + ts,
                             {{L.chp_pe[t][i], 1.0}, {L.chp_pe[t - 1][i], -1.0}},
                             milp::Sense::GE, -u.ramp_down * dt);
      }
    }

    // storage dynamics (cyclic: start at the minimum, end pinned by bounds)
    for (std::size_t i = 0; i < nchp; ++i) {
      if (L.chp_c[t][i] < 0) continue;
      const auto& h = *s.chp_units[i].hst;
      std::vector<milp::LinTerm> terms{{L.chp_c[t][i], 1.0}, {L.chp_phc[t][i], dt}};
      double rhs = 0.0;
      if (t == 0) rhs = h.c_min;
      else terms.push_back({L.chp_c[t - 1][i], -1.0});
      model.add_constraint("hst" + std::to_string(i + 1) + "_t" + ts, std::move(terms),
                           milp::Sense::EQ, rhs);
    }
    if (s.bess) {
      const auto& b = *s.bess;
      std::vector<milp::LinTerm> terms{{L.bess_s[t], 1.0},
                                       {L.bess_ch[t], -b.eff_ch * dt},
                                       {L.bess_dc[t], dt / b.eff_dc}};
      double rhs = 0.0;
      if (t == 0) rhs = b.s_min;
      else terms.push_back({L.bess_s[t - 1], -1.0});
      model.add_constraint("bess_t" + ts, std::move(terms), milp::Sense::EQ, rhs);

      // one binary forbids fictitious simultaneous charge and discharge
      model.add_constraint("bessx1_t" + ts, {{L.bess_ch[t], 1.0}, {L.bess_y[t], -b.p_max}},
                           milp::Sense::LE, 0.0);
      model.add_constraint("bessx2_t" + ts, {{L.bess_dc[t], 1.0}, {L.bess_y[t], b.p_max}},
                           milp::Sense::LE, b.p_max);

      // deliverable reserve: stored energy above the floor, and headroom
      model.add_constraint("bessr1_t" + ts,
                           {{L.bess_r[t], 1.0}, {L.bess_s[t], -b.eff_dc / dt}},
                           milp::Sense::LE, -b.eff_dc * b.s_min / dt);
      model.add_constraint("bessr2_t" + ts, {{L.bess_r[t], 1.0}, {L.bess_dc[t], 1.0}},
                           milp::Sense::LE, b.p_max);
    }

    // spinning reserve requirement
    std::vector<milp::LinTerm> reserve;
    for (std::size_t i = 0; i < nth; ++i) reserve.push_back({L.th_r[t][i], 1.0});
    for (std::size_t i = 0; i < nchp; ++i) reserve.push_back({L.chp_re[t][i], 1.0});
    if (s.bess) reserve.push_back({L.bess_r[t], 1.0});
    const auto& c_seq = out.joint[tu];
    if (!s.feat.uncertainty) {
      const double req = 0.20 * std::max(0.0, s.elec_load_mw[tu] - out.e_t[tu]);
      out.reserve_rhs.push_back(req);
      model.add_constraint("resv_t" + ts, std::move(reserve), milp::Sense::GE, req);
    } else if (s.chance == ChanceFormulation::kQuantile) {
      const double req = quantile_reserve(c_seq, s.alpha, out.e_t[tu]);
      out.reserve_rhs.push_back(req);
      model.add_constraint("resv_t" + ts, std::move(reserve), milp::Sense::GE, req);
    } else {
      const double n_ct_q = static_cast<double>(c_seq.max_index()) * s.q_step_mw;
      const double big_l =
          std::max(out.e_t[tu], reserve_cap + n_ct_q - out.e_t[tu]) + s.q_step_mw;
      out.big_l.push_back(big_l);
      L.z[tu] = chance_constraint_rows(model, c_seq, reserve, out.e_t[tu], s.alpha, big_l,
                                       "t" + ts);
    }
  }

  model.validate();
  return out;
}

inline milp::MilpModel build_model(const Scenario& s) { return build(s).model; }

// ---------------------------------------------------------------------------
// Schedule extraction
// ---------------------------------------------------------------------------

struct PeriodDispatch {
  std::vector<double> th_p, th_r;
  std::vector<double> chp_pe, chp_phr, chp_phc, chp_c, chp_re;
  double bess_ch = 0.0, bess_dc = 0.0, bess_s = 0.0, bess_r = 0.0;
  double eb_p = 0.0;
  double pc = 0.0, e_t = 0.0, curtailment = 0.0;
  double t_indoor = 0.0;
  double heat_load = 0.0;
  double reserve_total = 0.0;
};

struct Schedule {
  std::vector<PeriodDispatch> periods;
  double objective_milp = 0.0;  // PWL surrogate the solver optimized
  double cost_true_total = 0.0; // quadratic recomputation, c1 + c2 + c3
  double cost_thermal = 0.0;    // fuel + reserve of thermal units
  double cost_chp = 0.0;        // fuel + reserve of CHP units
  double cost_bess = 0.0;       // discharge - charge + reserve of the BESS
  double pwl_gap_total = 0.0;   // documented over-approximation bound
  int mode = 0;
  double alpha = 0.0;
  ChanceFormulation chance = ChanceFormulation::kBinary;
  double q_step = 0.0;

  double total_curtailment() const {
    double c = 0.0;
    for (const auto& p : periods) c += p.curtailment;
    return c;
  }
};

inline Schedule extract_schedule(const Scenario& s, const BuiltModel& built,
                                 const std::vector<double>& values, double milp_objective) {
  if (values.size() != static_cast<std::size_t>(built.model.num_vars()))
    throw std::invalid_argument("extract_schedule: solution size mismatch");
  const auto& L = built.layout;
  Schedule out;
  out.mode = s.mode_label;
  out.alpha = s.alpha;
  out.chance = s.chance;
  out.q_step = s.q_step_mw;
  out.objective_milp = milp_objective;
  auto val = [&](int id) { return id >= 0 ? values[static_cast<std::size_t>(id)] : 0.0; };

  const double dt = s.dt_h;
  double prev_tid = s.setpoint_c;
  for (int t = 0; t < s.horizon; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    PeriodDispatch p;
    for (std::size_t i = 0; i < s.thermal_units.size(); ++i) {
      p.th_p.push_back(val(L.th_p[t][i]));
      p.th_r.push_back(val(L.th_r[t][i]));
      const auto& u = s.thermal_units[i];
      out.cost_thermal += quad_cost(u.cost_a, u.cost_b, u.cost_c, p.th_p.back()) * dt +
                          u.reserve_cost * p.th_r.back() * dt;
      p.reserve_total += p.th_r.back();
    }
    for (std::size_t i = 0; i < s.chp_units.size(); ++i) {
      p.chp_pe.push_back(val(L.chp_pe[t][i]));
      p.chp_phr.push_back(val(L.chp_phr[t][i]));
      p.chp_phc.push_back(val(L.chp_phc[t][i]));
      p.chp_c.push_back(val(L.chp_c[t][i]));
      p.chp_re.push_back(val(L.chp_re[t][i]));
      const auto& u = s.chp_units[i];
      const double x = p.chp_pe.back() + u.c_v * (p.chp_phr.back() + p.chp_phc.back());
      out.cost_chp += quad_cost(u.cost_a, u.cost_b, u.cost_c, x) * dt +
                      u.reserve_cost * p.chp_re.back() * dt;
      p.reserve_total += p.chp_re.back();
    }
    if (s.bess) {
      p.bess_ch = val(L.bess_ch[t]);
      p.bess_dc = val(L.bess_dc[t]);
      p.bess_s = val(L.bess_s[t]);
      p.bess_r = val(L.bess_r[t]);
      out.cost_bess += (s.bess->cost_dc * p.bess_dc - s.bess->cost_ch * p.bess_ch +
                        s.bess->reserve_cost * p.bess_r) *
                       dt;
      p.reserve_total += p.bess_r;
    }
    p.eb_p = val(L.eb_p[t]);
    p.pc = val(L.pc[t]);
    p.e_t = built.e_t[tu];
    p.curtailment = std::max(0.0, p.e_t - p.pc);
    if (s.feat.thermal_inertia) {
      p.t_indoor = val(L.tid[t]);
      p.heat_load = heating_demand(*s.building, p.t_indoor, prev_tid,
                                   s.t_outdoor_c[tu], dt);
      prev_tid = p.t_indoor;
    } else {
      p.t_indoor = s.setpoint_c;
      p.heat_load = built.heat_static[tu];
    }
    out.periods.push_back(std::move(p));
  }
  out.cost_true_total = out.cost_thermal + out.cost_chp + out.cost_bess;

  for (const auto& u : s.thermal_units)
    out.pwl_gap_total +=
        pwl_gap_bound(u.cost_a, u.p_min, u.p_max, s.pwl_segments_k) * s.horizon * dt;
  for (const auto& u : s.chp_units) {
    const double phc = u.hst ? u.hst->p_c_max : 0.0;
    out.pwl_gap_total += pwl_gap_bound(u.cost_a, u.pe_min - u.c_v * phc,
                                       u.pe_max + u.c_v * (u.ph_max + phc),
                                       s.pwl_segments_k) *
                         s.horizon * dt;
  }
  return out;
}

inline Schedule extract_schedule(const Scenario& s, const milp::MipSolution& sol) {
  const auto built = build(s);
  return extract_schedule(s, built, sol.values, sol.objective);
}

}  // namespace iesched
