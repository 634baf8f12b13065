// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <queue>
#include <vector>

#include "iesched/milp.hpp"
#include "iesched/simplex.hpp"

namespace iesched::milp {

namespace detail {

inline constexpr double kIntTol = 1e-6;

struct BnbNode {
  long id = 0;
  double bound = 0.0;
  // bound tightenings relative to the original model, applied on top of a
  // full reset when the node is expanded
  std::vector<std::tuple<int, double, double>> fixes;
};

struct BnbNodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-bound first
    return a.id > b.id;                                // FIFO tie-break
  }
};

// Independent replay: the solution must satisfy every row and bound of the
// original model, with row-magnitude scaling. Never trusts solver state.
inline bool replay_feasible(const MilpModel& model, const std::vector<double>& x,
                            double tol) {
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& r = model.constraint(i);
    double act = 0.0, mag = 0.0;
    for (const auto& t : r.terms) {
      const double c = t.coef * x[static_cast<std::size_t>(t.var)];
      act += c;
      mag += std::fabs(c);
    }
    const double scale = tol * (1.0 + mag + std::fabs(r.rhs));
    switch (r.sense) {
      case Sense::LE: if (act > r.rhs + scale) return false; break;
      case Sense::GE: if (act < r.rhs - scale) return false; break;
      case Sense::EQ: if (std::fabs(act - r.rhs) > scale) return false; break;
    }
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variable(j);
    const double xj = x[static_cast<std::size_t>(j)];
    const double scale = tol * (1.0 + std::fabs(xj));
    if (xj < v.lb - scale || xj > v.ub + scale) return false;
    if (v.integer && std::fabs(xj - std::round(xj)) > kIntTol) return false;
  }
  return true;
}

}  // namespace detail

// Best-first branch and bound over the fractional integer variables
// (binaries in every model this project builds), branching on the most
// fractional one with lowest-index tie-break. Nodes warm-start the dual
// simplex from wherever the basis currently sits; bound changes never break
// dual feasibility. Deterministic for identical inputs as long as no
// wall-clock limit triggers.
inline MipSolution solve(const MilpModel& model, const SolveOptions& opts = {}) {
  using detail::BnbNode;
  using detail::kIntTol;
  model.validate();
  opts.validate();

  MipSolution out;
  std::vector<int> int_vars;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.variable(j).integer) int_vars.push_back(j);

  SimplexEngine eng(model, opts.feasibility_tol);
  SolveStatus st = eng.solve();
  out.nodes = 1;
  if (st == SolveStatus::kInfeasible || st == SolveStatus::kUnbounded ||
      st == SolveStatus::kNumericalFailure) {
    out.status = st;
    return out;
  }

  // Most fractional integer variable (largest distance to the nearest
  // integer), lowest index on ties; -1 when integral within tolerance.
  auto fractional_of = [&](const std::vector<double>& x) {
    int best = -1;
    double best_dist = kIntTol;
    for (int j : int_vars) {
      const double v = x[static_cast<std::size_t>(j)];
      const double dist = std::fabs(v - std::round(v));
      if (dist > best_dist + 1e-15) {
        best = j;
        best_dist = dist;
      }
    }
    return best;
  };

  const double root_obj = eng.objective();
  std::vector<double> root_x = eng.structural_values();
  int frac = fractional_of(root_x);
  if (frac < 0) {
    if (!detail::replay_feasible(model, root_x, opts.feasibility_tol * 100.0)) {
      out.status = SolveStatus::kNumericalFailure;
      return out;
    }
    out.status = SolveStatus::kOptimal;
    out.objective = root_obj;
    out.values = std::move(root_x);
    out.gap = 0.0;
    return out;
  }

  const auto t_start = std::chrono::steady_clock::now();
  auto time_up = [&]() {
    if (opts.time_limit_sec <= 0.0) return false;
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    return dt.count() > opts.time_limit_sec;
  };

  auto apply_node = [&](const BnbNode& node) {
    for (int j : int_vars) {
      const auto& v = model.variable(j);
      eng.set_col_bounds(j, v.lb, v.ub);
    }
    // fixes along the path intersect, so repeated branching on one variable
    // can only narrow it
    for (const auto& [j, lb, ub] : node.fixes)
      eng.set_col_bounds(j, std::max(lb, eng.col_lb(j)), std::min(ub, eng.col_ub(j)));
  };

  std::optional<double> inc_obj;
  std::vector<double> inc_x;

  auto offer_incumbent = [&](double obj, std::vector<double> x) {
    if (!detail::replay_feasible(model, x, opts.feasibility_tol * 100.0)) return false;
    if (!inc_obj || obj < *inc_obj) {
      inc_obj = obj;
      inc_x = std::move(x);
    }
    return true;
  };

  // Rounding dives from the root LP: fix every integer and re-solve the
  // continuous rest. Nearest rounding first; if that is infeasible, ceiling
  // rounding (for the chained coverage binaries of this model family the LP
  // values are monotone, so the ceiling is always a consistent completion).
  for (const bool ceil_mode : {false, true}) {
    BnbNode dive;
    for (int j : int_vars) {
      const double xv = root_x[static_cast<std::size_t>(j)];
      const double v = ceil_mode ? std::ceil(xv - kIntTol) : std::round(xv);
      dive.fixes.emplace_back(j, v, v);
    }
    apply_node(dive);
    if (eng.reoptimize() == SolveStatus::kOptimal) {
      offer_incumbent(eng.objective(), eng.structural_values());
      break;
    }
  }

  std::priority_queue<BnbNode, std::vector<BnbNode>, detail::BnbNodeOrder> open;
  long next_id = 1;
  {
    const double v = root_x[static_cast<std::size_t>(frac)];
    BnbNode down{next_id++, root_obj, {{frac, model.variable(frac).lb, std::floor(v)}}};
    BnbNode up{next_id++, root_obj, {{frac, std::ceil(v), model.variable(frac).ub}}};
    open.push(std::move(down));
    open.push(std::move(up));
  }

  bool limit_hit = false;
  double open_bound = root_obj;
  while (!open.empty()) {
    open_bound = open.top().bound;
    if (inc_obj && *inc_obj - open_bound <= opts.mip_gap * std::max(1.0, std::fabs(*inc_obj)))
      break;  // proven within gap
    if ((opts.node_limit > 0 && out.nodes >= opts.node_limit) || time_up()) {
      limit_hit = true;
      break;
    }
    BnbNode node = open.top();
    open.pop();

    apply_node(node);
    SolveStatus nst = eng.reoptimize();
    ++out.nodes;
    if (nst == SolveStatus::kNumericalFailure) {
      nst = eng.solve();  // cold restart rescue
      if (nst == SolveStatus::kNumericalFailure) {
        out.status = SolveStatus::kNumericalFailure;
        return out;
      }
    }
    if (nst == SolveStatus::kInfeasible) continue;
    if (nst != SolveStatus::kOptimal) {
      out.status = SolveStatus::kNumericalFailure;
      return out;
    }
    const double obj = eng.objective();
    if (inc_obj && obj >= *inc_obj - 1e-12 * std::max(1.0, std::fabs(*inc_obj))) continue;
    std::vector<double> x = eng.structural_values();
    const int b = fractional_of(x);
    if (b < 0) {
      offer_incumbent(obj, std::move(x));
      continue;
    }
    const double v = x[static_cast<std::size_t>(b)];
    BnbNode down{next_id++, obj, node.fixes};
    down.fixes.emplace_back(b, model.variable(b).lb, std::floor(v));
    BnbNode up{next_id++, obj, node.fixes};
    up.fixes.emplace_back(b, std::ceil(v), model.variable(b).ub);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  if (inc_obj) {
    out.objective = *inc_obj;
    out.values = std::move(inc_x);
    if (limit_hit) {
      out.status = SolveStatus::kLimitReached;
      out.gap = (*inc_obj - open_bound) / std::max(1.0, std::fabs(*inc_obj));
    } else {
      out.status = SolveStatus::kOptimal;
      out.gap = open.empty() ? 0.0
                             : std::max(0.0, (*inc_obj - open_bound) /
                                                 std::max(1.0, std::fabs(*inc_obj)));
    }
  } else {
    out.status = limit_hit ? SolveStatus::kLimitReached : SolveStatus::kInfeasible;
    out.gap = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace iesched::milp
