// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "iesched/branch_bound.hpp"
#include "iesched/json_io.hpp"
#include "iesched/scheduler.hpp"
#include "scenario_fixtures.hpp"

namespace {

using namespace iesched;

TEST(PwlSegments, HandComputedSecants) {
  const auto segs = pwl_segments(0.01, 10.0, 0.0, 0.0, 100.0, 2);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_NEAR(segs[0].slope, 10.5, 1e-12);
  EXPECT_NEAR(segs[0].intercept, 0.0, 1e-12);
  EXPECT_NEAR(segs[1].slope, 11.5, 1e-12);
  EXPECT_NEAR(segs[1].intercept, -50.0, 1e-12);
  // the epigraph max reproduces f exactly at the shared breakpoint
  const double at100 = std::max(segs[0].slope * 100.0 + segs[0].intercept,
                                segs[1].slope * 100.0 + segs[1].intercept);
  EXPECT_NEAR(at100, 1100.0, 1e-9);
}

TEST(PwlSegments, LinearCostIsSingleSegment) {
  const auto segs = pwl_segments(0.0, 7.5, 3.0, 10.0, 90.0, 11);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_DOUBLE_EQ(segs[0].slope, 7.5);
  EXPECT_DOUBLE_EQ(segs[0].intercept, 3.0);
}

TEST(PwlSegments, OverApproximationBound) {
  const double a = 0.0044, b = 13.29, c = 39.0, lo = 92.5, hi = 245.0;
  const int k = 8;
  const auto segs = pwl_segments(a, b, c, lo, hi, k);
  const double bound = pwl_gap_bound(a, lo, hi, k);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double p = lo + (hi - lo) * i / 1000.0;
    double env = -1e30;
    for (const auto& s : segs) env = std::max(env, s.slope * p + s.intercept);
    const double f = quad_cost(a, b, c, p);
    EXPECT_GE(env, f - 1e-9);  // secants over-approximate convex f
    worst = std::max(worst, env - f);
  }
  EXPECT_LE(worst, bound + 1e-9);
}

TEST(PwlSegments, RejectsConcave) {
  EXPECT_THROW(pwl_segments(-0.1, 1.0, 0.0, 0.0, 10.0, 4), std::invalid_argument);
}

// Minimal reserve admitted by the chance rows, found by a tiny MILP.
double min_reserve_admitted(const ProbSeq& c_seq, double e_t, double alpha, double cap) {
  milp::MilpModel m;
  const int r = m.add_variable("r_total", 0.0, cap);
  m.set_objective(r, 1.0);
  const double n_ct_q = static_cast<double>(c_seq.max_index()) * c_seq.step_q();
  const double big_l = std::max(e_t, cap + n_ct_q - e_t) + c_seq.step_q();
  chance_constraint_rows(m, c_seq, {{r, 1.0}}, e_t, alpha, big_l, "t1");
  const auto sol = milp::solve(m);
  EXPECT_EQ(sol.status, milp::SolveStatus::kOptimal);
  return sol.objective;
}

TEST(ChanceRows, DeterministicZeroOutput) {
  const auto c = ProbSeq(5.0, {1.0});
  EXPECT_NEAR(min_reserve_admitted(c, 0.0, 0.9, 50.0), 0.0, 1e-9);
}

TEST(ChanceRows, FullCoverageRequiresTotalShortfall) {
  const auto c = ProbSeq(5.0, {0.3, 0.4, 0.3});
  EXPECT_NEAR(min_reserve_admitted(c, 12.0, 1.0, 50.0), 12.0, 1e-9);
}

TEST(ChanceRows, MatchesQuantileReserveOnRandomSequences) {
  std::mt19937_64 rng(31);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) { v = 0.05 + uni(0.0, 1.0); sum += v; }
    for (auto& v : p) v /= sum;
    const double q = uni(2.0, 8.0);
    const auto c = ProbSeq(q, p);
    const double e_t = uni(0.0, static_cast<double>(n) * q);
    const double alpha = uni(0.05, 1.0);
    const double want = quantile_reserve(c, alpha, e_t);
    const double got = min_reserve_admitted(c, e_t, alpha, 400.0);
    EXPECT_NEAR(got, want, q + 1e-6) << "rep " << rep;
  }
}

TEST(ApplyMode, TableOfSixModes) {
  const auto base = fixtures::mini_system(2);
  const auto m1 = apply_mode(base, 1);
  EXPECT_FALSE(m1.bess.has_value());
  EXPECT_FALSE(m1.eb.has_value());
  for (const auto& u : m1.chp_units) EXPECT_FALSE(u.hst.has_value());
  EXPECT_TRUE(m1.feat.uncertainty);
  EXPECT_TRUE(m1.feat.thermal_inertia);

  const auto m2 = apply_mode(base, 2);
  EXPECT_TRUE(m2.bess.has_value());
  EXPECT_FALSE(m2.eb.has_value());
  for (const auto& u : m2.chp_units) EXPECT_FALSE(u.hst.has_value());

  const auto m3 = apply_mode(base, 3);
  EXPECT_TRUE(m3.bess.has_value());
  EXPECT_TRUE(m3.eb.has_value());
  EXPECT_TRUE(m3.chp_units[0].hst.has_value());

  const auto m4 = apply_mode(base, 4);
  EXPECT_FALSE(m4.feat.uncertainty);
  EXPECT_TRUE(m4.feat.thermal_inertia);

  const auto m5 = apply_mode(base, 5);
  EXPECT_TRUE(m5.feat.uncertainty);
  EXPECT_FALSE(m5.feat.thermal_inertia);

  const auto m6 = apply_mode(base, 6);
  EXPECT_FALSE(m6.feat.uncertainty);
  EXPECT_FALSE(m6.feat.thermal_inertia);
  EXPECT_TRUE(m6.bess.has_value());

  auto no_bess = base;
  no_bess.bess.reset();
  EXPECT_THROW(apply_mode(no_bess, 2), std::invalid_argument);
  EXPECT_THROW(apply_mode(base, 0), std::invalid_argument);
  EXPECT_THROW(apply_mode(base, 7), std::invalid_argument);
}

TEST(BuildModel, VariableCensusMatchesClosedForm) {
  const auto s = load_scenario(fixtures::data_dir() + "/winter_day.json");
  const auto built = build(s);
  // closed form, term by term: 3 per thermal, 6 per CHP with tank, 5 BESS,
  // 1 boiler, 1 renewable consumption, 2 building, plus N_ct+1 binaries
  long per_period = 3 * 4 + 6 * 2 + 5 + 1 + 1 + 2;
  long expected = per_period * s.horizon;
  for (const auto& c : built.joint) expected += static_cast<long>(c.size());
  EXPECT_EQ(built.model.num_vars(), expected);
  EXPECT_EQ(expected, expected_variable_count(s, built.joint));
}

TEST(BuildModel, ModeOneHasNoDeviceVariables) {
  const auto s = apply_mode(fixtures::mini_system(2), 1);
  const auto built = build(s);
  for (int j = 0; j < built.model.num_vars(); ++j) {
    const auto& name = built.model.variable(j).name;
    EXPECT_EQ(name.find("bess"), std::string::npos) << name;
    EXPECT_EQ(name.find("eb_"), std::string::npos) << name;
    EXPECT_EQ(name.find("_phc"), std::string::npos) << name;
    EXPECT_EQ(name.find("_c_t"), std::string::npos) << name;
  }
}

TEST(BuildModel, SingleUnitToyOptimum) {
  const auto s = fixtures::single_unit_toy();
  const auto built = build(s);
  const auto sol = milp::solve(built.model);
  ASSERT_EQ(sol.status, milp::SolveStatus::kOptimal);
  // the load sits on a PWL breakpoint, so the epigraph is exact there
  EXPECT_NEAR(sol.objective, quad_cost(0.01, 10.0, 0.0, 30.0), 1e-5);
  const auto sched = extract_schedule(s, built, sol.values, sol.objective);
  EXPECT_NEAR(sched.periods[0].th_p[0], 30.0, 1e-7);
  EXPECT_EQ(sched.periods[0].chp_pe.size(), 0u);
  EXPECT_NEAR(sched.periods[0].bess_s, 0.0, 0.0);
  // objective decomposition: true quadratic within the documented PWL gap
  EXPECT_LE(std::fabs(sched.objective_milp - sched.cost_true_total),
            sched.pwl_gap_total + 1e-6);
}

TEST(BuildModel, FormulationEquivalenceOnMiniSystem) {
  auto s = fixtures::mini_system(2);
  s.chance = ChanceFormulation::kBinary;
  const auto bin = milp::solve(build(s).model);
  s.chance = ChanceFormulation::kQuantile;
  const auto qua = milp::solve(build(s).model);
  ASSERT_EQ(bin.status, milp::SolveStatus::kOptimal);
  ASSERT_EQ(qua.status, milp::SolveStatus::kOptimal);
  const double rel = std::fabs(bin.objective - qua.objective) /
                     std::max(1.0, std::fabs(qua.objective));
  EXPECT_LE(rel, 1e-6);
}

TEST(BuildModel, TerminalStorageReturnsToFloor) {
  auto s = fixtures::mini_system(3);
  const auto built = build(s);
  const auto sol = milp::solve(built.model);
  ASSERT_EQ(sol.status, milp::SolveStatus::kOptimal);
  const auto sched = extract_schedule(s, built, sol.values, sol.objective);
  EXPECT_NEAR(sched.periods.back().bess_s, s.bess->s_min, 1e-6);
  for (std::size_t i = 0; i < s.chp_units.size(); ++i)
    EXPECT_NEAR(sched.periods.back().chp_c[i], s.chp_units[i].hst->c_min, 1e-6);
}

TEST(BuildModel, BalanceResidualsAtSolution) {
  auto s = fixtures::mini_system(3);
  const auto built = build(s);
  const auto sol = milp::solve(built.model);
  ASSERT_EQ(sol.status, milp::SolveStatus::kOptimal);
  // replay the two balance rows directly from the solution values
  for (int i = 0; i < built.model.num_constraints(); ++i) {
    const auto& row = built.model.constraint(i);
    if (row.name.rfind("elec_t", 0) == 0 || row.name.rfind("heat_t", 0) == 0) {
      double act = 0.0;
      for (const auto& t : row.terms) act += t.coef * sol.values[static_cast<std::size_t>(t.var)];
      EXPECT_NEAR(act, row.rhs, 1e-6) << row.name;
    }
  }
}

TEST(Scenario, ValidationErrors) {
  auto s = fixtures::mini_system(2);
  s.elec_load_mw[1] = -5.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);

  auto s2 = fixtures::mini_system(2);
  s2.alpha = 0.0;
  EXPECT_THROW(s2.validate(), std::invalid_argument);

  auto s3 = fixtures::mini_system(2);
  s3.wind.pop_back();
  EXPECT_THROW(s3.validate(), std::invalid_argument);
}

}  // namespace
