// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iesched/building.hpp"
#include "iesched/devices.hpp"
#include "iesched/probseq.hpp"

namespace iesched {

enum class ChanceFormulation { kBinary, kQuantile };

inline const char* to_string(ChanceFormulation f) {
  return f == ChanceFormulation::kBinary ? "binary" : "quantile";
}

// Feature switches behind the six operating modes: which auxiliary devices
// participate, whether renewable output is treated probabilistically, and
// whether the indoor temperature is a decision variable or pinned at the
// setpoint.
struct Features {
  bool use_bess = true;
  bool use_hst = true;
  bool use_eb = true;
  bool uncertainty = true;
  bool thermal_inertia = true;
};

inline Features mode_features(int mode) {
  switch (mode) {
    case 1: return {false, false, false, true, true};
    case 2: return {true, false, false, true, true};
    case 3: return {true, true, true, true, true};
    case 4: return {true, true, true, false, true};
    case 5: return {true, true, true, true, false};
    case 6: return {true, true, true, false, false};
    default: throw std::invalid_argument("mode must be 1..6");
  }
}

// Full instance description for one scheduling run.
struct Scenario {
  int horizon = 0;
  double dt_h = 1.0;

  std::vector<ThermalUnit> thermal_units;
  std::vector<ChpUnit> chp_units;
  std::optional<Bess> bess;
  std::optional<Eb> eb;

  std::optional<BuildingParams> building;
  std::optional<ComfortBand> comfort;
  double setpoint_c = 20.0;

  std::vector<double> elec_load_mw;  // one per period
  std::vector<double> t_outdoor_c;   // one per period
  std::vector<WindParams> wind;      // one per period
  std::vector<PvParams> pv;          // one per period

  double q_step_mw = 5.0;
  double alpha = 0.95;
  ChanceFormulation chance = ChanceFormulation::kBinary;
  int pwl_segments_k = 8;
  Features feat;
  int mode_label = 3;

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("scenario: horizon must be >= 1");
    if (!(dt_h > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
    auto check_len = [&](std::size_t n, const char* what) {
      if (n != static_cast<std::size_t>(horizon))
        throw std::invalid_argument(std::string("scenario: ") + what +
                                    " length must equal horizon");
    };
    check_len(elec_load_mw.size(), "elec_load_mw");
    check_len(t_outdoor_c.size(), "t_outdoor_c");
    check_len(wind.size(), "wind");
    check_len(pv.size(), "pv");
    for (std::size_t t = 0; t < elec_load_mw.size(); ++t)
      if (elec_load_mw[t] < 0.0)
        throw std::invalid_argument("scenario: elec_load_mw[" + std::to_string(t + 1) +
                                    "] must be nonnegative");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("scenario: alpha must lie in (0, 1]");
    if (!(q_step_mw > 0.0)) throw std::invalid_argument("scenario: q_step_mw must be positive");
    if (pwl_segments_k < 1)
      throw std::invalid_argument("scenario: pwl_segments_k must be >= 1");
    if (!building || !comfort)
      throw std::invalid_argument("scenario: building and comfort band are required");
    if (feat.use_bess && !bess)
      throw std::invalid_argument("scenario: selected mode requires a BESS");
    if (feat.use_eb && !eb)
      throw std::invalid_argument("scenario: selected mode requires an electric boiler");
    if (feat.use_hst) {
      bool any = false;
      for (const auto& u : chp_units) any = any || u.hst.has_value();
      if (!any)
        throw std::invalid_argument("scenario: selected mode requires a heat storage tank");
    }
    if (feat.thermal_inertia && comfort->t_b > comfort->t_c)
      throw std::invalid_argument("scenario: empty comfort plateau");
  }
};

// Applies one of the six operating modes: strips devices the mode excludes
// and sets the uncertainty/inertia switches. Modes that need a device the
// scenario does not carry are rejected.
inline Scenario apply_mode(const Scenario& base, int mode) {
  const Features f = mode_features(mode);
  Scenario s = base;
  s.feat = f;
  s.mode_label = mode;
  if (!f.use_bess) s.bess.reset();
  else if (!base.bess)
    throw std::invalid_argument("mode " + std::to_string(mode) + " requires a BESS");
  if (!f.use_eb) s.eb.reset();
  else if (!base.eb)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " requires an electric boiler");
  if (!f.use_hst) {
    for (auto& u : s.chp_units) u.hst.reset();
  } else {
    bool any = false;
    for (const auto& u : s.chp_units) any = any || u.hst.has_value();
    if (!any)
      throw std::invalid_argument("mode " + std::to_string(mode) +
                                  " requires a heat storage tank");
  }
  return s;
}

}  // namespace iesched
