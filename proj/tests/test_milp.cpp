// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "iesched/branch_bound.hpp"
#include "iesched/milp.hpp"
#include "iesched/simplex.hpp"
#include "milp_random.hpp"
#include "naive_simplex.hpp"

namespace {

using namespace iesched::milp;

TEST(SolveLp, SingleVariableLowerBoundRow) {
  MilpModel m;
  const int x = m.add_variable("x", 0.0, 10.0);
  m.set_objective(x, 1.0);
  m.add_constraint("c1", {{x, 1.0}}, Sense::GE, 3.0);
  const auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-9);
  EXPECT_NEAR(sol.values[0], 3.0, 1e-9);
  ASSERT_EQ(sol.duals.size(), 1u);
  EXPECT_NEAR(sol.duals[0], 1.0, 1e-9);  // objective moves 1:1 with the rhs
}

TEST(SolveLp, MaxViaNegatedMin) {
  // max x + 2y  s.t. x + y <= 1, x,y >= 0  ->  optimum at y = 1
  MilpModel m;
  const int x = m.add_variable("x", 0.0, kInf);
  const int y = m.add_variable("y", 0.0, kInf);
  m.set_objective(x, -1.0);
  m.set_objective(y, -2.0);
  m.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Sense::LE, 1.0);
  const auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, -2.0, 1e-9);
  EXPECT_NEAR(sol.values[static_cast<std::size_t>(y)], 1.0, 1e-9);
  EXPECT_NEAR(sol.values[static_cast<std::size_t>(x)], 0.0, 1e-9);
}

TEST(SolveLp, DetectsUnbounded) {
  MilpModel m;
  const int x = m.add_variable("x", 0.0, kInf);
  m.set_objective(x, -1.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::kUnbounded);

  MilpModel m2;
  const int y = m2.add_variable("y", 0.0, kInf);
  m2.set_objective(y, -1.0);
  m2.add_constraint("r", {{y, -1.0}}, Sense::LE, 5.0);  // y >= -5, no upper cap
  EXPECT_EQ(solve_lp(m2).status, SolveStatus::kUnbounded);
}

TEST(SolveLp, DetectsInfeasible) {
  MilpModel m;
  const int x = m.add_variable("x", 0.0, 10.0);
  m.set_objective(x, 1.0);
  m.add_constraint("lo", {{x, 1.0}}, Sense::GE, 3.0);
  m.add_constraint("hi", {{x, 1.0}}, Sense::LE, 2.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::kInfeasible);
}

TEST(SolveLp, EqualityRowsAndFreeVariable) {
  MilpModel m;
  const int x = m.add_variable("x", -kInf, kInf);
  const int y = m.add_variable("y", 0.0, 4.0);
  m.set_objective(x, 0.0);
  m.set_objective(y, 1.0);
  m.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, Sense::EQ, 2.0);
  m.add_constraint("floor", {{x, 1.0}}, Sense::LE, -1.0);  // x <= -1 so y >= 3
  const auto sol = solve_lp(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-9);
}

TEST(SolveLp, RandomAgainstNaiveTableau) {
  std::mt19937_64 rng(42);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 10, mrows = 10;
    std::vector<std::vector<double>> A(mrows, std::vector<double>(n, 0.0));
    std::vector<double> b(mrows), c(n), ub(n);
    for (int i = 0; i < mrows; ++i) {
      for (int j = 0; j < n; ++j) A[i][j] = (rng() % 2) ? uni(-1.5, 2.0) : 0.0;
      b[i] = uni(0.5, 6.0);  // nonnegative: origin feasible for the oracle
    }
    for (int j = 0; j < n; ++j) {
      c[j] = uni(-3.0, 3.0);
      ub[j] = uni(0.5, 5.0);
    }
    // oracle form: upper bounds as explicit rows
    auto A2 = A;
    auto b2 = b;
    for (int j = 0; j < n; ++j) {
      std::vector<double> row(n, 0.0);
      row[static_cast<std::size_t>(j)] = 1.0;
      A2.push_back(row);
      b2.push_back(ub[static_cast<std::size_t>(j)]);
    }
    double oracle_obj = 0.0;
    ASSERT_TRUE(test_oracle::naive_simplex_min(A2, b2, c, oracle_obj));

    MilpModel m;
    for (int j = 0; j < n; ++j)
      m.add_variable("x" + std::to_string(j), 0.0, ub[static_cast<std::size_t>(j)]);
    for (int j = 0; j < n; ++j) m.set_objective(j, c[static_cast<std::size_t>(j)]);
    for (int i = 0; i < mrows; ++i) {
      std::vector<LinTerm> terms;
      for (int j = 0; j < n; ++j)
        if (A[i][j] != 0.0) terms.push_back({j, A[i][j]});
      m.add_constraint("r" + std::to_string(i), std::move(terms), Sense::LE,
                       b[static_cast<std::size_t>(i)]);
    }
    const auto sol = solve_lp(m);
    ASSERT_EQ(sol.status, SolveStatus::kOptimal);
    EXPECT_NEAR(sol.objective, oracle_obj, 1e-7);
    ++solved;
  }
  EXPECT_EQ(solved, 60);
}

TEST(Solve, TwoBinaryCover) {
  MilpModel m;
  const int x = m.add_binary("x");
  const int y = m.add_binary("y");
  m.set_objective(x, 1.0);
  m.set_objective(y, 1.0);
  m.add_constraint("cover", {{x, 1.0}, {y, 1.0}}, Sense::GE, 1.5);
  const auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-9);
}

TEST(Solve, IntegralRelaxationSolvedAtRoot) {
  MilpModel m;
  const int x = m.add_binary("x");
  m.set_objective(x, 2.0);
  m.add_constraint("need", {{x, 1.0}}, Sense::GE, 1.0);
  const auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
  EXPECT_EQ(sol.nodes, 1);
}

TEST(Solve, KnapsackAgainstExhaustiveEnumeration) {
  std::mt19937_64 rng(5);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };
  const int n = 12;
  std::vector<double> value(n), weight(n);
  for (int j = 0; j < n; ++j) {
    value[j] = uni(1.0, 10.0);
    weight[j] = uni(1.0, 8.0);
  }
  const double cap = 20.0;

  double best = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double v = 0.0, w = 0.0;
    for (int j = 0; j < n; ++j)
      if (mask & (1 << j)) {
        v += value[static_cast<std::size_t>(j)];
        w += weight[static_cast<std::size_t>(j)];
      }
    if (w <= cap) best = std::max(best, v);
  }

  MilpModel m;
  std::vector<LinTerm> row;
  for (int j = 0; j < n; ++j) {
    const int id = m.add_binary("z" + std::to_string(j));
    m.set_objective(id, -value[static_cast<std::size_t>(j)]);
    row.push_back({id, weight[static_cast<std::size_t>(j)]});
  }
  m.add_constraint("cap", std::move(row), Sense::LE, cap);
  const auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::kOptimal);
  EXPECT_NEAR(-sol.objective, best, 1e-9);
}

TEST(Solve, RandomMilpsMatchEnumeration) {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const auto rm = milp_random::make_random_milp(rng, 9);
    double enum_obj = 0.0;
    const bool enum_feasible = milp_random::enumerate_optimum(rm, enum_obj);
    const auto sol = solve(rm.model);
    if (!enum_feasible) {
      EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << "rep " << rep;
      continue;
    }
    ASSERT_EQ(sol.status, SolveStatus::kOptimal) << "rep " << rep;
    EXPECT_NEAR(sol.objective, enum_obj, 1e-6) << "rep " << rep;
    EXPECT_LE(rm.model.max_violation(sol.values), 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

// Coefficient spreads like the chance rows produce: O(1) masses next to
// O(100) linking constants, knapsack-tight rows, deeper trees.
TEST(Solve, WideCoefficientScalesMatchEnumeration) {
  std::mt19937_64 rng(2718);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    milp_random::RandomMilp rm;
    const int nb = 6 + static_cast<int>(rng() % 7);  // 6..12 binaries
    const int nc = 2 + static_cast<int>(rng() % 3);
    for (int j = 0; j < nb; ++j) {
      const int id = rm.model.add_binary("b" + std::to_string(j));
      rm.model.set_objective(id, uni(-5.0, 5.0));
      rm.binaries.push_back(id);
    }
    for (int j = 0; j < nc; ++j) {
      const int id = rm.model.add_variable("c" + std::to_string(j), 0.0, uni(10.0, 200.0));
      rm.model.set_objective(id, uni(0.1, 2.0));
    }
    // indicator-style rows: continuous >= K * z with K up to a few hundred
    for (int j = 0; j < nb; ++j) {
      const int cont = nb + static_cast<int>(rng() % static_cast<unsigned>(nc));
      const double big = uni(20.0, 400.0);
      rm.model.add_constraint("ind" + std::to_string(j),
                              {{cont, 1.0}, {rm.binaries[static_cast<std::size_t>(j)], -big}},
                              iesched::milp::Sense::GE, uni(-50.0, 10.0));
    }
    // a tight covering row over the binaries
    std::vector<iesched::milp::LinTerm> cover;
    for (int j = 0; j < nb; ++j)
      cover.push_back({rm.binaries[static_cast<std::size_t>(j)], uni(0.02, 1.0)});
    rm.model.add_constraint("cover", std::move(cover), iesched::milp::Sense::GE,
                            uni(0.5, 2.0));
    double enum_obj = 0.0;
    const bool feasible = milp_random::enumerate_optimum(rm, enum_obj);
    const auto sol = solve(rm.model);
    if (!feasible) {
      EXPECT_EQ(sol.status, SolveStatus::kInfeasible) << "rep " << rep;
      continue;
    }
    ASSERT_EQ(sol.status, SolveStatus::kOptimal) << "rep " << rep;
    EXPECT_NEAR(sol.objective, enum_obj, 1e-6 * (1.0 + std::fabs(enum_obj))) << "rep " << rep;
    ++solved;
  }
  EXPECT_GE(solved, 25);
}

TEST(Solve, DeterministicAcrossRuns) {
  std::mt19937_64 rng(123);
  const auto rm = milp_random::make_random_milp(rng, 9);
  const auto a = solve(rm.model);
  const auto b = solve(rm.model);
  ASSERT_EQ(a.status, b.status);
  if (a.status == SolveStatus::kOptimal) {
    EXPECT_EQ(a.objective, b.objective);
    ASSERT_EQ(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
    EXPECT_EQ(a.nodes, b.nodes);
  }
}

TEST(Solve, NodeLimitReported) {
  std::mt19937_64 rng(7);
  // a model that needs branching
  MilpModel m;
  std::vector<LinTerm> row;
  for (int j = 0; j < 10; ++j) {
    const int id = m.add_binary("z" + std::to_string(j));
    m.set_objective(id, -(1.0 + 0.1 * j));
    row.push_back({id, 1.0 + 0.07 * j});
  }
  m.add_constraint("cap", std::move(row), Sense::LE, 4.3);
  SolveOptions opts;
  opts.node_limit = 2;
  const auto sol = solve(m, opts);
  EXPECT_TRUE(sol.status == SolveStatus::kLimitReached || sol.status == SolveStatus::kOptimal);
  (void)rng;
}

TEST(MilpModel, ValidateCatchesBadModels) {
  MilpModel m;
  const int x = m.add_variable("x", 1.0, 0.0);
  (void)x;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

}  // namespace
