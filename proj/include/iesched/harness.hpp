// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <vector>

#include "iesched/building.hpp"
#include "iesched/devices.hpp"
#include "iesched/probseq.hpp"
#include "iesched/rng.hpp"
#include "iesched/scenario.hpp"
#include "iesched/scheduler.hpp"
#include "iesched/special.hpp"

namespace iesched {

// ---------------------------------------------------------------------------
// Inverse-CDF samplers. Both invert the same CDFs the discretizers integrate,
// so the Monte Carlo stream and the sequence construction cannot drift apart.
// ---------------------------------------------------------------------------

inline double sample_wind_power(const WindParams& w, double u) {
  const double v = w.scale_eps * std::pow(-std::log1p(-u), 1.0 / w.shape_m);
  if (v < w.v_in || v >= w.v_out) return 0.0;
  if (v >= w.v_s) return w.p_s;
  return (v - w.v_in) / (w.v_s - w.v_in) * w.p_s;
}

inline double sample_pv_power(const PvParams& p, double u) {
  return p.p_max_pv * inv_reg_inc_beta(p.lambda1, p.lambda2, u);
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

struct FamilyResult {
  std::string family;
  double max_residual = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<FamilyResult> families;
  bool replay_pass = true;

  std::vector<double> mc_coverage;  // per-period empirical coverage
  std::vector<double> mc_floor;     // per-period acceptance floor
  double mc_min_coverage = 1.0;
  double coverage_allowance = 0.015;  // sampling + calibration slack below alpha
  bool mc_pass = true;                // meaningful once mc_coverage is filled
  std::uint64_t seed = 0;
  long mc_samples = 0;

  bool pass() const { return replay_pass && mc_pass; }
};

// ---------------------------------------------------------------------------
// Monte Carlo chance-constraint verification
// ---------------------------------------------------------------------------

// For each period, samples wind and PV from their continuous laws and
// reports the fraction of draws in which the scheduled reserve covers the
// shortfall between expected and realized output. Period streams derive
// from (seed, period), so the result is identical no matter how the periods
// are distributed over workers.
inline std::vector<double> monte_carlo_reserve_check(const Scenario& s,
                                                     const Schedule& sched, long n,
                                                     std::uint64_t seed) {
  if (n < 10000)
    throw std::invalid_argument("monte_carlo_reserve_check: need at least 1e4 samples");
  if (sched.periods.size() != static_cast<std::size_t>(s.horizon))
    throw std::invalid_argument("monte_carlo_reserve_check: schedule/scenario mismatch");

  auto one_period = [&](int t) {
    const auto tu = static_cast<std::size_t>(t);
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(t)));
    const double reserve = sched.periods[tu].reserve_total;
    const double e_t = sched.periods[tu].e_t;
    long covered = 0;
    for (long i = 0; i < n; ++i) {
      const double wind = sample_wind_power(s.wind[tu], rng.uniform01());
      const double pv = sample_pv_power(s.pv[tu], rng.uniform01());
      if (reserve >= e_t - wind - pv - 1e-9) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(n);
  };

  std::vector<double> coverage(static_cast<std::size_t>(s.horizon), 0.0);
  std::vector<std::future<double>> jobs;
  jobs.reserve(coverage.size());
  for (int t = 0; t < s.horizon; ++t)
    jobs.push_back(std::async(std::launch::async, one_period, t));
  for (int t = 0; t < s.horizon; ++t) coverage[static_cast<std::size_t>(t)] = jobs[static_cast<std::size_t>(t)].get();
  return coverage;
}

// ---------------------------------------------------------------------------
// Full schedule replay
// ---------------------------------------------------------------------------

// Re-evaluates every constraint family from Scenario + Schedule alone,
// through the device and building primitives, never touching the MILP.
inline ValidationReport validate_schedule(const Scenario& s, const Schedule& sched,
                                          double tol = 1e-6) {
  if (sched.periods.size() != static_cast<std::size_t>(s.horizon))
    throw std::invalid_argument("validate_schedule: schedule/scenario mismatch");
  ValidationReport rep;

  const auto joint = joint_sequences(s);
  std::vector<double> e_t;
  for (const auto& c : joint) e_t.push_back(c.expectation());

  auto family = [&](const std::string& name, double residual) {
    rep.families.push_back(FamilyResult{name, residual, tol, residual <= tol});
    rep.replay_pass = rep.replay_pass && residual <= tol;
  };

  const double dt = s.dt_h;
  const auto& bld = *s.building;
  const auto& band = *s.comfort;
  const double kf = bld.loss_mw_per_c();

  double r_elec = 0.0, r_heat = 0.0, r_thb = 0.0, r_thramp = 0.0, r_chpb = 0.0,
         r_chpramp = 0.0, r_storage = 0.0, r_terminal = 0.0, r_eb = 0.0, r_renew = 0.0,
         r_comfort = 0.0, r_rescap = 0.0, r_chance = 0.0;

  double prev_tid = s.setpoint_c;
  double prev_s = s.bess ? s.bess->s_min : 0.0;
  std::vector<double> prev_c(s.chp_units.size());
  for (std::size_t i = 0; i < s.chp_units.size(); ++i)
    prev_c[i] = s.chp_units[i].hst ? s.chp_units[i].hst->c_min : 0.0;

  for (int t = 0; t < s.horizon; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    const auto& p = sched.periods[tu];

    // heating demand implied by the temperature trajectory
    double heat_load;
    if (s.feat.thermal_inertia) {
      heat_load = heating_demand(bld, p.t_indoor, prev_tid, s.t_outdoor_c[tu], dt);
      r_comfort = std::max(r_comfort, band.t_b - p.t_indoor);
      r_comfort = std::max(r_comfort, p.t_indoor - band.t_c);
      prev_tid = p.t_indoor;
    } else {
      heat_load = std::max(0.0, kf * (s.setpoint_c - s.t_outdoor_c[tu]));
    }

    double gen = p.pc, heat = 0.0;
    for (std::size_t i = 0; i < s.thermal_units.size(); ++i) {
      const auto& u = s.thermal_units[i];
      gen += p.th_p[i];
      r_thb = std::max({r_thb, u.p_min - p.th_p[i], p.th_p[i] - u.p_max, -p.th_r[i]});
      r_rescap = std::max(r_rescap, p.th_p[i] + p.th_r[i] - u.p_max);
      if (t > 0) {
        const double d = p.th_p[i] - sched.periods[tu - 1].th_p[i];
        r_thramp = std::max({r_thramp, d - u.ramp_up * dt, -d - u.ramp_down * dt});
      }
    }
    for (std::size_t i = 0; i < s.chp_units.size(); ++i) {
      const auto& u = s.chp_units[i];
      gen += p.chp_pe[i];
      heat += p.chp_phr[i] + p.chp_phc[i];
      r_chpb = std::max({r_chpb, u.pe_min - p.chp_pe[i], p.chp_pe[i] - u.pe_max,
                         -p.chp_phr[i], p.chp_phr[i] - u.ph_max, -p.chp_re[i]});
      if (u.backpressure_k)
        r_chpb = std::max(r_chpb, u.c_m * p.chp_phr[i] - *u.backpressure_k - p.chp_pe[i]);
      r_rescap = std::max(r_rescap, p.chp_pe[i] + p.chp_re[i] - u.pe_max);
      if (t > 0) {
        const double d = p.chp_pe[i] - sched.periods[tu - 1].chp_pe[i];
        r_chpramp = std::max({r_chpramp, d - u.ramp_up * dt, -d - u.ramp_down * dt});
      }
      if (u.hst) {
        r_chpb = std::max({r_chpb, std::fabs(p.chp_phc[i]) - u.hst->p_c_max});
        const double want = hst_step(*u.hst, prev_c[i], p.chp_phc[i], dt);
        r_storage = std::max(r_storage, std::fabs(p.chp_c[i] - want));
        r_storage = std::max({r_storage, u.hst->c_min - p.chp_c[i], p.chp_c[i] - u.hst->c_max});
        prev_c[i] = p.chp_c[i];
        if (t + 1 == s.horizon)
          r_terminal = std::max(r_terminal, std::fabs(p.chp_c[i] - u.hst->c_min));
      }
    }
    if (s.bess) {
      const auto& b = *s.bess;
      gen += p.bess_dc - p.bess_ch;
      const double want = bess_step(b, prev_s, p.bess_ch, p.bess_dc, dt);
      r_storage = std::max(r_storage, std::fabs(p.bess_s - want));
      r_storage = std::max({r_storage, b.s_min - p.bess_s, p.bess_s - b.s_max,
                            -p.bess_ch, p.bess_ch - b.p_max, -p.bess_dc,
                            p.bess_dc - b.p_max, -p.bess_r});
      r_rescap = std::max(r_rescap,
                          p.bess_r - std::min(b.eff_dc * (p.bess_s - b.s_min) / dt,
                                              b.p_max - p.bess_dc));
      prev_s = p.bess_s;
      if (t + 1 == s.horizon)
        r_terminal = std::max(r_terminal, std::fabs(p.bess_s - b.s_min));
    }
    if (s.eb) {
      gen -= p.eb_p;
      heat += p.eb_p * s.eb->eff;
      r_eb = std::max({r_eb, -p.eb_p, p.eb_p - s.eb->p_eb_max});
    }
    r_elec = std::max(r_elec, std::fabs(gen - s.elec_load_mw[tu]));
    r_heat = std::max(r_heat, std::fabs(heat - heat_load));
    r_renew = std::max({r_renew, -p.pc, p.pc - e_t[tu], -p.curtailment});

    // reserve adequacy: discrete chance coverage, or the deterministic rule
    if (s.feat.uncertainty) {
      const auto& c_seq = joint[tu];
      const double q = c_seq.step_q();
      double cover = 0.0;
      for (std::size_t m = 0; m < c_seq.size(); ++m)
        if (p.reserve_total >= e_t[tu] - static_cast<double>(m) * q - 1e-9) cover += c_seq[m];
      r_chance = std::max(r_chance, s.alpha - cover);
    } else {
      const double req = 0.20 * std::max(0.0, s.elec_load_mw[tu] - e_t[tu]);
      r_chance = std::max(r_chance, req - p.reserve_total);
    }
  }

  family("electric_balance", r_elec);
  family("heat_balance", r_heat);
  family("thermal_bounds", r_thb);
  family("thermal_ramps", r_thramp);
  family("chp_bounds", r_chpb);
  family("chp_ramps", r_chpramp);
  family("storage_dynamics", r_storage);
  family("terminal_state", r_terminal);
  family("boiler_bounds", r_eb);
  family("renewable_consumption", r_renew);
  if (s.feat.thermal_inertia) family("comfort_band", r_comfort);
  family("reserve_caps", r_rescap);
  family("reserve_requirement", r_chance);
  return rep;
}

// Attaches a Monte Carlo coverage verdict to a replay report. The chance
// constraint holds on the binned distribution; against the continuous law
// the coverage can fall short of alpha by at most the mass of the grid bin
// whose window straddles the covered shortfall, so the per-period floor
// grants that bin on top of the flat sampling allowance.
inline void attach_monte_carlo(ValidationReport& rep, const Scenario& s,
                               const Schedule& sched, long n, std::uint64_t seed) {
  rep.seed = seed;
  rep.mc_samples = n;
  rep.mc_coverage = monte_carlo_reserve_check(s, sched, n, seed);
  rep.mc_min_coverage = 1.0;
  rep.mc_floor.clear();
  const auto joint = joint_sequences(s);
  rep.mc_pass = true;
  for (int t = 0; t < s.horizon; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    const auto& c = joint[tu];
    const double q = c.step_q();
    const double shortfall = sched.periods[tu].e_t - sched.periods[tu].reserve_total;
    const auto pivot = static_cast<std::size_t>(
        std::min<double>(std::max(0.0, std::ceil(shortfall / q - 1e-9)),
                         static_cast<double>(c.max_index())));
    const double floor_t = s.alpha - rep.coverage_allowance - c[pivot];
    rep.mc_floor.push_back(floor_t);
    rep.mc_min_coverage = std::min(rep.mc_min_coverage, rep.mc_coverage[tu]);
    rep.mc_pass = rep.mc_pass && rep.mc_coverage[tu] >= floor_t;
  }
}

// ---------------------------------------------------------------------------
// Discretization audit
// ---------------------------------------------------------------------------

namespace harness_detail {

// Sup distance between the empirical CDF of the samples and the sequence
// cumulative, compared at the half-open window edges the bins collect
// (P(X < edge) on both sides, so window alignment is exact).
inline double kolmogorov_distance(const ProbSeq& seq, std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double q = seq.step_q();
  double cum = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    cum += seq[i];
    const double edge = static_cast<double>(i) * q + 0.5 * q;
    const auto it = std::lower_bound(samples.begin(), samples.end(), edge);
    const double emp = static_cast<double>(it - samples.begin()) / n;  // P(X < edge)
    dist = std::max(dist, std::fabs(cum - emp));
  }
  return dist;
}

}  // namespace harness_detail

inline double audit_discretization(const WindParams& w, double q, long n,
                                   std::uint64_t seed) {
  if (n < 10000) throw std::invalid_argument("audit_discretization: need at least 1e4 samples");
  const auto seq = discretize_wind(w, q);
  Rng rng(seed);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) samples.push_back(sample_wind_power(w, rng.uniform01()));
  return harness_detail::kolmogorov_distance(seq, std::move(samples));
}

inline double audit_discretization(const PvParams& p, double q, long n,
                                   std::uint64_t seed) {
  if (n < 10000) throw std::invalid_argument("audit_discretization: need at least 1e4 samples");
  const auto seq = discretize_pv(p, q);
  Rng rng(seed);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) samples.push_back(sample_pv_power(p, rng.uniform01()));
  return harness_detail::kolmogorov_distance(seq, std::move(samples));
}

}  // namespace iesched
