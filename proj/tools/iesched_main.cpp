// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: loads a scenario, runs one operating mode or all
// six across a list of confidence levels, solves with the embedded solver
// (or exports LP files), validates every schedule independently, and writes
// results plus plot-ready CSV series.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iesched/iesched.hpp"

namespace fs = std::filesystem;
using namespace iesched;

namespace {

struct RunConfig {
  std::string scenario_path;
  std::vector<int> modes;
  std::vector<double> alphas;  // empty: use the scenario value
  std::optional<ChanceFormulation> chance;
  bool lp_export_only = false;
  std::optional<double> q_override;
  long mc_samples = 100000;
  std::uint64_t seed = 20240801;
  std::string out_dir = "out";
};

struct RunOutcome {
  int mode = 0;
  double alpha_requested = 0.0;
  double alpha_used = 0.0;
  std::string formulation;
  std::string status;
  double objective = 0.0;
  double true_cost = 0.0;
  double curtailment_mwh = 0.0;
  bool validation_pass = false;
  double mc_min_coverage = 1.0;
  bool mc_applicable = false;
  std::vector<double> reserve_by_period;
  std::vector<double> curtail_by_period;
  bool ok = false;
};

std::string fmt_alpha(double a) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", a);
  return buf;
}

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto range_pos = tok.find("..");
    if (range_pos != std::string::npos) {
      const auto colon = tok.find(':', range_pos);
      const double lo = std::stod(tok.substr(0, range_pos));
      const double hi = std::stod(tok.substr(range_pos + 2,
                                             colon == std::string::npos
                                                 ? std::string::npos
                                                 : colon - range_pos - 2));
      const double step = colon == std::string::npos ? 0.01 : std::stod(tok.substr(colon + 1));
      if (!(step > 0.0) || hi < lo) throw CLI::ValidationError("--alpha", "bad range " + tok);
      for (double a = lo; a <= hi + 1e-9; a += step) out.push_back(a);
    } else {
      out.push_back(std::stod(tok));
    }
  }
  for (double a : out)
    if (!(a > 0.0 && a <= 1.0))
      throw CLI::ValidationError("--alpha", "values must lie in (0, 1]");
  return out;
}

std::string csv_num(double v) { return json_detail::num(v); }

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_device_csv(const std::string& path, const Scenario& s, const Schedule& sched) {
  std::vector<std::string> header{"period", "elec_load_mw", "t_outdoor_c", "heat_load_mw"};
  for (std::size_t i = 0; i < s.thermal_units.size(); ++i)
    header.push_back("thermal" + std::to_string(i + 1) + "_p_mw");
  for (std::size_t i = 0; i < s.chp_units.size(); ++i) {
    header.push_back("chp" + std::to_string(i + 1) + "_pe_mw");
    header.push_back("chp" + std::to_string(i + 1) + "_heat_mw");
    header.push_back("hst" + std::to_string(i + 1) + "_transfer_mw");
    header.push_back("hst" + std::to_string(i + 1) + "_state_mwh");
  }
  header.insert(header.end(),
                {"bess_charge_mw", "bess_discharge_mw", "bess_state_mwh", "eb_p_mw",
                 "renewable_used_mw", "renewable_expected_mw", "curtailment_mw",
                 "indoor_temp_c", "reserve_total_mw"});
  std::vector<std::vector<std::string>> rows;
  for (int t = 0; t < s.horizon; ++t) {
    const auto& p = sched.periods[static_cast<std::size_t>(t)];
    std::vector<std::string> row{std::to_string(t + 1),
                                 csv_num(s.elec_load_mw[static_cast<std::size_t>(t)]),
                                 csv_num(s.t_outdoor_c[static_cast<std::size_t>(t)]),
                                 csv_num(p.heat_load)};
    for (double v : p.th_p) row.push_back(csv_num(v));
    for (std::size_t i = 0; i < s.chp_units.size(); ++i) {
      row.push_back(csv_num(p.chp_pe[i]));
      row.push_back(csv_num(p.chp_phr[i]));
      row.push_back(csv_num(p.chp_phc[i]));
      row.push_back(csv_num(p.chp_c[i]));
    }
    row.push_back(csv_num(p.bess_ch));
    row.push_back(csv_num(p.bess_dc));
    row.push_back(csv_num(p.bess_s));
    row.push_back(csv_num(p.eb_p));
    row.push_back(csv_num(p.pc));
    row.push_back(csv_num(p.e_t));
    row.push_back(csv_num(p.curtailment));
    row.push_back(csv_num(p.t_indoor));
    row.push_back(csv_num(p.reserve_total));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

RunOutcome run_one(const Scenario& base, int mode, double alpha, const RunConfig& cfg) {
  RunOutcome out;
  out.mode = mode;
  out.alpha_requested = alpha;

  Scenario s = apply_mode(base, mode);
  if (cfg.chance) s.chance = *cfg.chance;
  if (cfg.q_override) s.q_step_mw = *cfg.q_override;
  out.formulation = s.feat.uncertainty ? to_string(s.chance) : "deterministic";

  const fs::path dir = fs::path(cfg.out_dir) /
                       ("m" + std::to_string(mode) + "_a" + fmt_alpha(alpha));
  fs::create_directories(dir);

  Json attempts = Json::array();
  double a_try = alpha;
  // on infeasibility the confidence level steps down by 0.01 to a floor of
  // 0.80, recording every attempt
  while (true) {
    s.alpha = a_try;
    const auto built = build(s);

    if (cfg.lp_export_only) {
      write_text_file((dir / "model.lp").string(), milp::export_lp_file(built.model));
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["kind"] = "lp_export";
      j["mode"] = mode;
      j["alpha"] = a_try;
      j["chance_formulation"] = out.formulation;
      j["variables"] = built.model.num_vars();
      j["constraints"] = built.model.num_constraints();
      write_json_file((dir / "result.json").string(), j);
      out.status = "exported";
      out.alpha_used = a_try;
      out.ok = true;
      return out;
    }

    const auto sol = milp::solve(built.model);
    attempts.push_back(Json{{"alpha", a_try}, {"status", milp::to_string(sol.status)}});
    if (sol.status == milp::SolveStatus::kOptimal) {
      out.alpha_used = a_try;
      out.status = milp::to_string(sol.status);
      const auto sched = extract_schedule(s, built, sol.values, sol.objective);
      auto rep = validate_schedule(s, sched);
      if (s.feat.uncertainty) {
        attach_monte_carlo(rep, s, sched, cfg.mc_samples, cfg.seed);
        out.mc_applicable = true;
        out.mc_min_coverage = rep.mc_min_coverage;
      }
      out.objective = sol.objective;
      out.true_cost = sched.cost_true_total;
      out.curtailment_mwh = sched.total_curtailment() * s.dt_h;
      out.validation_pass = rep.pass();
      out.ok = rep.pass();
      for (const auto& p : sched.periods) {
        out.reserve_by_period.push_back(p.reserve_total);
        out.curtail_by_period.push_back(p.curtailment);
      }

      Json j = schedule_to_json(s, sched, out.status);
      j["alpha_requested"] = alpha;
      j["attempts"] = attempts;
      write_json_file((dir / "schedule.json").string(), j);
      write_json_file((dir / "validation.json").string(), report_to_json(rep));
      write_device_csv((dir / "device_outputs.csv").string(), s, sched);
      return out;
    }
    if (sol.status == milp::SolveStatus::kInfeasible && s.feat.uncertainty &&
        a_try - 0.01 >= 0.80 - 1e-9) {
      a_try -= 0.01;
      continue;
    }
    out.status = milp::to_string(sol.status);
    out.alpha_used = a_try;
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "failed_run";
    j["mode"] = mode;
    j["alpha_requested"] = alpha;
    j["status"] = out.status;
    j["attempts"] = attempts;
    write_json_file((dir / "result.json").string(), j);
    return out;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat-and-electricity scheduling with probabilistic spinning reserve"};
  RunConfig cfg;
  std::string mode_arg = "scenario";
  std::string alpha_arg;
  std::string chance_arg;
  std::string solver_arg = "embedded";

  app.add_option("--scenario", cfg.scenario_path, "scenario JSON document")
      ->required()
      ->check(CLI::ExistingFile)
      ->envname("IESCHED_SCENARIO");
  app.add_option("--mode", mode_arg, "operating mode 1..6, 'all', or 'scenario'")
      ->envname("IESCHED_MODE");
  app.add_option("--alpha", alpha_arg,
                 "confidence levels: comma list and/or lo..hi:step ranges")
      ->envname("IESCHED_ALPHA");
  app.add_option("--chance", chance_arg, "chance formulation: binary or quantile")
      ->envname("IESCHED_CHANCE");
  app.add_option("--solver", solver_arg, "embedded or lp-export")
      ->envname("IESCHED_SOLVER");
  app.add_option("--q", cfg.q_override, "discretization step override, MW")
      ->envname("IESCHED_Q");
  app.add_option("--mc-samples", cfg.mc_samples, "Monte Carlo sample count")
      ->envname("IESCHED_MC_SAMPLES");
  app.add_option("--seed", cfg.seed, "Monte Carlo seed")->envname("IESCHED_SEED");
  app.add_option("--out", cfg.out_dir, "output directory")->envname("IESCHED_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // uniform usage-error code; --help stays 0
  }

  try {
    if (solver_arg == "lp-export") cfg.lp_export_only = true;
    else if (solver_arg != "embedded")
      throw std::invalid_argument("--solver must be 'embedded' or 'lp-export'");
    if (!chance_arg.empty()) {
      if (chance_arg == "binary") cfg.chance = ChanceFormulation::kBinary;
      else if (chance_arg == "quantile") cfg.chance = ChanceFormulation::kQuantile;
      else throw std::invalid_argument("--chance must be 'binary' or 'quantile'");
    }
    if (cfg.q_override && !(*cfg.q_override > 0.0))
      throw std::invalid_argument("--q must be positive");
    if (cfg.mc_samples < 10000)
      throw std::invalid_argument("--mc-samples must be at least 10000");

    const Scenario base = load_scenario(cfg.scenario_path);
    if (mode_arg == "all") cfg.modes = {1, 2, 3, 4, 5, 6};
    else if (mode_arg == "scenario") cfg.modes = {base.mode_label};
    else cfg.modes = {std::stoi(mode_arg)};
    for (int m : cfg.modes) (void)mode_features(m);  // validates 1..6

    cfg.alphas = alpha_arg.empty() ? std::vector<double>{base.alpha}
                                   : parse_alpha_list(alpha_arg);

    fs::create_directories(cfg.out_dir);
    std::vector<RunOutcome> outcomes;
    bool all_ok = true;
    for (int mode : cfg.modes) {
      for (double alpha : cfg.alphas) {
        auto oc = run_one(base, mode, alpha, cfg);
        std::cout << "mode " << mode << " alpha " << fmt_alpha(alpha) << " -> " << oc.status;
        if (oc.status == "optimal")
          std::cout << " objective " << csv_num(oc.objective)
                    << (oc.validation_pass ? " [validated]" : " [VALIDATION FAILED]");
        std::cout << "\n";
        all_ok = all_ok && oc.ok;
        outcomes.push_back(std::move(oc));
      }
    }

    // summary and figure-style aggregates, written once after all runs
    {
      Json summary;
      summary["schema_version"] = kSchemaVersion;
      summary["kind"] = "summary";
      summary["scenario"] = cfg.scenario_path;
      summary["seed"] = cfg.seed;
      Json rows = Json::array();
      std::vector<std::vector<std::string>> csv_rows, cost_rows, resv_rows, curt_rows;
      for (const auto& oc : outcomes) {
        Json r;
        r["mode"] = oc.mode;
        r["alpha_requested"] = oc.alpha_requested;
        r["alpha_used"] = oc.alpha_used;
        r["formulation"] = oc.formulation;
        r["status"] = oc.status;
        r["objective"] = oc.objective;
        r["cost_true_total"] = oc.true_cost;
        r["curtailment_mwh"] = oc.curtailment_mwh;
        r["validation_pass"] = oc.validation_pass;
        if (oc.mc_applicable) r["mc_min_coverage"] = oc.mc_min_coverage;
        rows.push_back(std::move(r));
        csv_rows.push_back({std::to_string(oc.mode), fmt_alpha(oc.alpha_requested),
                            fmt_alpha(oc.alpha_used), oc.formulation, oc.status,
                            csv_num(oc.objective), csv_num(oc.true_cost),
                            csv_num(oc.curtailment_mwh),
                            oc.validation_pass ? "1" : "0"});
        if (oc.status == "optimal") {
          double rtot = 0.0;
          for (double v : oc.reserve_by_period) rtot += v;
          std::vector<std::string> rr{std::to_string(oc.mode), fmt_alpha(oc.alpha_used),
                                      csv_num(rtot)};
          for (double v : oc.reserve_by_period) rr.push_back(csv_num(v));
          resv_rows.push_back(std::move(rr));
          std::vector<std::string> cr{std::to_string(oc.mode), fmt_alpha(oc.alpha_used),
                                      csv_num(oc.curtailment_mwh)};
          for (double v : oc.curtail_by_period) cr.push_back(csv_num(v));
          curt_rows.push_back(std::move(cr));
          cost_rows.push_back({std::to_string(oc.mode), fmt_alpha(oc.alpha_used),
                               csv_num(oc.objective), csv_num(oc.true_cost)});
        }
      }
      summary["runs"] = std::move(rows);
      summary["all_ok"] = all_ok;
      write_json_file((fs::path(cfg.out_dir) / "summary.json").string(), summary);
      write_csv((fs::path(cfg.out_dir) / "summary.csv").string(),
                {"mode", "alpha_requested", "alpha_used", "formulation", "status",
                 "objective", "cost_true_total", "curtailment_mwh", "validation_pass"},
                csv_rows);
      const int T = base.horizon;
      std::vector<std::string> rh{"mode", "alpha", "total_reserve_mwh"};
      std::vector<std::string> ch{"mode", "alpha", "total_curtailment_mwh"};
      for (int t = 1; t <= T; ++t) {
        rh.push_back("r_t" + std::to_string(t));
        ch.push_back("c_t" + std::to_string(t));
      }
      write_csv((fs::path(cfg.out_dir) / "reserve_vs_alpha.csv").string(), rh, resv_rows);
      write_csv((fs::path(cfg.out_dir) / "curtailment_by_mode.csv").string(), ch, curt_rows);
      write_csv((fs::path(cfg.out_dir) / "cost_vs_alpha.csv").string(),
                {"mode", "alpha", "objective", "cost_true_total"}, cost_rows);
    }

    return all_ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
