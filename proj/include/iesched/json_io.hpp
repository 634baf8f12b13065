// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "iesched/harness.hpp"
#include "iesched/scenario.hpp"
#include "iesched/scheduler.hpp"

namespace iesched {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace json_detail {

inline std::string num(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

[[noreturn]] inline void fail(const std::string& ctx, const std::string& what) {
  throw std::invalid_argument(ctx + ": " + what);
}

inline const Json& require(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) fail(ctx, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double require_num(const Json& j, const char* key, const std::string& ctx) {
  const auto& v = require(j, key, ctx);
  if (!v.is_number()) fail(ctx, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> require_series(const Json& j, const char* key, int horizon,
                                          const std::string& ctx) {
  const auto& v = require(j, key, ctx);
  if (!v.is_array() || v.size() != static_cast<std::size_t>(horizon))
    fail(ctx, std::string("field '") + key + "' must be an array of length " +
                  std::to_string(horizon));
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) fail(ctx, std::string("field '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace json_detail

// ---------------------------------------------------------------------------
// Scenario loading
// ---------------------------------------------------------------------------

inline Scenario scenario_from_json(const Json& j, const std::string& ctx) {
  using json_detail::fail;
  using json_detail::require;
  using json_detail::require_num;
  using json_detail::require_series;

  Scenario s;
  const int version = static_cast<int>(require_num(j, "schema_version", ctx));
  if (version != kSchemaVersion)
    fail(ctx, "unsupported schema_version " + std::to_string(version));
  s.horizon = static_cast<int>(require_num(j, "horizon", ctx));
  if (s.horizon < 1) fail(ctx, "horizon must be >= 1");
  s.dt_h = require_num(j, "dt_h", ctx);
  s.q_step_mw = require_num(j, "q_step_mw", ctx);
  s.alpha = require_num(j, "alpha", ctx);
  s.pwl_segments_k = static_cast<int>(require_num(j, "pwl_segments", ctx));
  s.setpoint_c = require_num(j, "setpoint_c", ctx);
  if (j.contains("mode")) s.mode_label = j.at("mode").get<int>();
  {
    const auto& f = require(j, "chance_formulation", ctx);
    if (!f.is_string()) fail(ctx, "chance_formulation must be a string");
    const std::string v = f.get<std::string>();
    if (v == "binary") s.chance = ChanceFormulation::kBinary;
    else if (v == "quantile") s.chance = ChanceFormulation::kQuantile;
    else fail(ctx, "chance_formulation must be 'binary' or 'quantile'");
  }

  const auto& th = require(j, "thermal_units", ctx);
  if (!th.is_array() || th.empty()) fail(ctx, "thermal_units must be a nonempty array");
  for (std::size_t i = 0; i < th.size(); ++i) {
    const std::string uctx = ctx + ": thermal_units[" + std::to_string(i) + "]";
    const auto& u = th[i];
    try {
      s.thermal_units.emplace_back(
          require_num(u, "p_min", uctx), require_num(u, "p_max", uctx),
          require_num(u, "ramp_up", uctx), require_num(u, "ramp_down", uctx),
          require_num(u, "cost_a", uctx), require_num(u, "cost_b", uctx),
          require_num(u, "cost_c", uctx), require_num(u, "reserve_cost", uctx));
    } catch (const std::invalid_argument& e) {
      fail(uctx, e.what());
    }
  }
  const auto& ch = require(j, "chp_units", ctx);
  if (!ch.is_array()) fail(ctx, "chp_units must be an array");
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const std::string uctx = ctx + ": chp_units[" + std::to_string(i) + "]";
    const auto& u = ch[i];
    try {
      std::optional<Hst> tank;
      if (u.contains("hst") && !u.at("hst").is_null()) {
        const auto& h = u.at("hst");
        tank = Hst(require_num(h, "c_min", uctx), require_num(h, "c_max", uctx),
                   require_num(h, "p_c_max", uctx));
      }
      std::optional<double> bp;
      if (u.contains("backpressure_k") && !u.at("backpressure_k").is_null())
        bp = u.at("backpressure_k").get<double>();
      s.chp_units.emplace_back(
          require_num(u, "pe_min", uctx), require_num(u, "pe_max", uctx),
          require_num(u, "ph_max", uctx), require_num(u, "c_v", uctx),
          require_num(u, "c_m", uctx), require_num(u, "ramp_up", uctx),
          require_num(u, "ramp_down", uctx), require_num(u, "cost_a", uctx),
          require_num(u, "cost_b", uctx), require_num(u, "cost_c", uctx),
          require_num(u, "reserve_cost", uctx), tank, bp);
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }
  if (j.contains("bess") && !j.at("bess").is_null()) {
    const std::string uctx = ctx + ": bess";
    const auto& b = j.at("bess");
    try {
      s.bess = Bess(require_num(b, "s_min", uctx), require_num(b, "s_max", uctx),
                    require_num(b, "p_max", uctx), require_num(b, "eff_ch", uctx),
                    require_num(b, "eff_dc", uctx), require_num(b, "cost_dc", uctx),
                    require_num(b, "cost_ch", uctx), require_num(b, "reserve_cost", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }
  if (j.contains("eb") && !j.at("eb").is_null()) {
    const std::string uctx = ctx + ": eb";
    const auto& b = j.at("eb");
    try {
      s.eb = Eb(require_num(b, "p_eb_max", uctx), require_num(b, "eff", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }
  {
    const std::string uctx = ctx + ": building";
    const auto& b = require(j, "building", ctx);
    try {
      s.building = BuildingParams(
          require_num(b, "k_w_m2c", uctx), require_num(b, "surface_m2", uctx),
          require_num(b, "volume_m3", uctx), require_num(b, "c_air_kj_kgc", uctx),
          require_num(b, "rho_air_kg_m3", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }
  {
    const std::string uctx = ctx + ": comfort";
    const auto& b = require(j, "comfort", ctx);
    try {
      s.comfort = ComfortBand(require_num(b, "t_a", uctx), require_num(b, "t_b", uctx),
                              require_num(b, "t_c", uctx), require_num(b, "t_d", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }

  s.elec_load_mw = require_series(j, "elec_load_mw", s.horizon, ctx);
  s.t_outdoor_c = require_series(j, "t_outdoor_c", s.horizon, ctx);

  const auto& wind = require(j, "wind", ctx);
  if (!wind.is_array() || wind.size() != static_cast<std::size_t>(s.horizon))
    fail(ctx, "wind must be an array of length " + std::to_string(s.horizon));
  for (std::size_t t = 0; t < wind.size(); ++t) {
    const std::string uctx = ctx + ": wind[" + std::to_string(t) + "]";
    const auto& w = wind[t];
    try {
      s.wind.emplace_back(require_num(w, "v_in", uctx), require_num(w, "v_s", uctx),
                          require_num(w, "v_out", uctx), require_num(w, "p_s", uctx),
                          require_num(w, "shape_m", uctx), require_num(w, "scale_eps", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }
  const auto& pv = require(j, "pv", ctx);
  if (!pv.is_array() || pv.size() != static_cast<std::size_t>(s.horizon))
    fail(ctx, "pv must be an array of length " + std::to_string(s.horizon));
  for (std::size_t t = 0; t < pv.size(); ++t) {
    const std::string uctx = ctx + ": pv[" + std::to_string(t) + "]";
    const auto& w = pv[t];
    try {
      s.pv.emplace_back(require_num(w, "lambda1", uctx), require_num(w, "lambda2", uctx),
                        require_num(w, "p_max", uctx));
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      if (msg.rfind(uctx, 0) == 0) throw;
      fail(uctx, msg);
    }
  }

  s.feat = Features{s.bess.has_value(), [&] {
                      for (const auto& u : s.chp_units)
                        if (u.hst) return true;
                      return false;
                    }(),
                    s.eb.has_value(), true, true};
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(ctx, e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open scenario file");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": JSON parse error: " + e.what());
  }
  return scenario_from_json(j, path);
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

inline Json schedule_to_json(const Scenario& s, const Schedule& sched,
                             const std::string& status) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "schedule";
  j["status"] = status;
  j["mode"] = sched.mode;
  j["alpha"] = sched.alpha;
  j["chance_formulation"] = to_string(sched.chance);
  j["q_step_mw"] = sched.q_step;
  j["objective_milp"] = sched.objective_milp;
  j["cost_true_total"] = sched.cost_true_total;
  j["cost_thermal"] = sched.cost_thermal;
  j["cost_chp"] = sched.cost_chp;
  j["cost_bess"] = sched.cost_bess;
  j["pwl_gap_bound"] = sched.pwl_gap_total;
  j["total_curtailment_mwh"] = sched.total_curtailment() * s.dt_h;
  Json periods = Json::array();
  for (const auto& p : sched.periods) {
    Json e;
    e["thermal_p_mw"] = p.th_p;
    e["thermal_r_mw"] = p.th_r;
    e["chp_pe_mw"] = p.chp_pe;
    e["chp_heat_mw"] = p.chp_phr;
    e["hst_transfer_mw"] = p.chp_phc;
    e["hst_state_mwh"] = p.chp_c;
    e["chp_re_mw"] = p.chp_re;
    e["bess_charge_mw"] = p.bess_ch;
    e["bess_discharge_mw"] = p.bess_dc;
    e["bess_state_mwh"] = p.bess_s;
    e["bess_reserve_mw"] = p.bess_r;
    e["eb_p_mw"] = p.eb_p;
    e["renewable_used_mw"] = p.pc;
    e["renewable_expected_mw"] = p.e_t;
    e["curtailment_mw"] = p.curtailment;
    e["indoor_temp_c"] = p.t_indoor;
    e["heat_load_mw"] = p.heat_load;
    e["reserve_total_mw"] = p.reserve_total;
    periods.push_back(std::move(e));
  }
  j["periods"] = std::move(periods);
  return j;
}

inline Json report_to_json(const ValidationReport& rep) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "validation";
  j["pass"] = rep.pass();
  j["replay_pass"] = rep.replay_pass;
  Json fam = Json::array();
  for (const auto& f : rep.families) {
    Json e;
    e["family"] = f.family;
    e["max_residual"] = f.max_residual;
    e["tol"] = f.tol;
    e["pass"] = f.pass;
    fam.push_back(std::move(e));
  }
  j["families"] = std::move(fam);
  if (!rep.mc_coverage.empty()) {
    j["mc_samples"] = rep.mc_samples;
    j["mc_seed"] = rep.seed;
    j["mc_coverage"] = rep.mc_coverage;
    j["mc_floor"] = rep.mc_floor;
    j["mc_min_coverage"] = rep.mc_min_coverage;
    j["coverage_allowance"] = rep.coverage_allowance;
    j["mc_pass"] = rep.mc_pass;
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace iesched
