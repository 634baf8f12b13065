// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <vector>

#include "iesched/milp.hpp"

namespace iesched::milp {

// Bounded-variable simplex over the equality form [A | I] x = b obtained by
// giving every row a slack column (slack bounds encode the row sense).
//
// The engine keeps a dense inverse of the basis, column-major, updated by
// sparsity-aware rank-1 pivots. The normal path is dual simplex from the
// all-slack basis (which is dual feasible once every column rests on its
// cost-favored bound); models without a favored bound for some column fall
// back to a two-phase primal. Reoptimization after bound changes -- the
// branch-and-bound workhorse -- reuses the current basis, which stays dual
// feasible because costs never change.
//
// Every claimed optimum is re-certified from freshly recomputed values and
// reduced costs; failures surface as kNumericalFailure, never as a wrong
// answer.
class SimplexEngine {
 public:
  SimplexEngine(const MilpModel& model, double feasibility_tol)
      : feas_tol_(feasibility_tol) {
    build(model);
  }

  // Structural-variable bounds, e.g. branching fixes. Reduced costs are
  // unaffected, so the current basis remains a valid dual-feasible warm
  // start.
  void set_col_bounds(int j, double lb, double ub) {
    lo_[static_cast<std::size_t>(j)] = lb;
    up_[static_cast<std::size_t>(j)] = ub;
    auto& st = status_[static_cast<std::size_t>(j)];
    if (st != kBasic) {
      if (st == kAtLower && !std::isfinite(lb)) st = std::isfinite(ub) ? kAtUpper : kFreeZero;
      if (st == kAtUpper && !std::isfinite(ub)) st = std::isfinite(lb) ? kAtLower : kFreeZero;
    }
  }

  double col_lb(int j) const { return lo_[static_cast<std::size_t>(j)]; }
  double col_ub(int j) const { return up_[static_cast<std::size_t>(j)]; }

  // Cold solve from the all-slack basis.
  SolveStatus solve() {
    iterations_ = 0;
    if (rows_ == 0) return solve_no_rows();
    reset_to_slack_basis();
    if (dual_start_possible()) {
      place_nonbasic_for_dual_start();
      recompute_x();
      perturb_costs();  // breaks the huge dual degeneracy of cost-free binaries
      reset_reduced_costs();
      const SolveStatus st = dual_loop();
      restore_costs();
      if (debug_certify)
        std::fprintf(stderr, "solve: dual_loop -> %s after %ld iters\n", to_string(st),
                     iterations_);
      if (st != SolveStatus::kNumericalFailure) {
        const SolveStatus cst = certify(st);
        if (cst != SolveStatus::kNumericalFailure) return cst;
      }
      // fall through to primal on numerical trouble
      reset_to_slack_basis();
    }
    place_nonbasic_primal_default();
    recompute_x();
    SolveStatus st = primal_phase1();
    if (st != SolveStatus::kOptimal) return st;
    reset_reduced_costs();
    st = primal_phase2();
    return certify(st);
  }

  // Warm re-solve after bound changes. Reduced costs stay valid across
  // bound changes, so the dual loop continues on the maintained state; the
  // full certification then guards both sides, because a node value that
  // overstates the LP bound would prune subtrees it must not.
  SolveStatus reoptimize() {
    if (rows_ == 0) return solve_no_rows();
    snap_nonbasic_into_bounds();
    recompute_x();
    SolveStatus st = dual_loop();
    if (st == SolveStatus::kNumericalFailure) {
      perturb_costs();
      reset_reduced_costs();
      st = dual_loop();
      restore_costs();
    }
    return certify(st);
  }

  double objective() const {
    double v = obj_constant_;
    for (std::size_t j = 0; j < nstruct_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  std::vector<double> structural_values() const {
    return std::vector<double>(x_.begin(), x_.begin() + static_cast<long>(nstruct_));
  }

  // Duals of the equality-form rows (y = c_B * Binv).
  std::vector<double> duals() const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t k = 0; k < rows_; ++k) {
      double acc = 0.0;
      const double* col = &binv_[k * rows_];
      for (std::size_t i = 0; i < rows_; ++i) {
        const double cb = cost_[static_cast<std::size_t>(basic_[i])];
        if (cb != 0.0) acc += cb * col[i];
      }
      y[k] = acc;
    }
    return y;
  }

  long iterations() const { return iterations_; }

  bool debug_certify = false;

  // debug/inspection helpers
  int col_state(int j) const { return status_[static_cast<std::size_t>(j)]; }
  double col_value(int j) const { return x_[static_cast<std::size_t>(j)]; }
  std::size_t slack_col(int row) const { return nstruct_ + static_cast<std::size_t>(row); }

  // Residual of the equality form at the current point; independent of the
  // basis bookkeeping.
  double equality_residual() const {
    double worst = 0.0;
    std::vector<double> act(rows_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) {
      const double xj = x_[j];
      if (xj == 0.0) continue;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        act[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] +=
            col_val_[static_cast<std::size_t>(k)] * xj;
    }
    for (std::size_t i = 0; i < rows_; ++i)
      worst = std::max(worst, std::fabs(act[i] - rhs_[i]) / (1.0 + std::fabs(rhs_[i])));
    return worst;
  }

 private:
  enum ColStatus : signed char { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFreeZero = 3 };

  static constexpr double kInfV = std::numeric_limits<double>::infinity();

  void build(const MilpModel& model) {
    nstruct_ = static_cast<std::size_t>(model.num_vars());
    rows_ = static_cast<std::size_t>(model.num_constraints());
    ncols_ = nstruct_ + rows_;
    obj_constant_ = model.objective_constant();

    cost_.assign(ncols_, 0.0);
    lo_.assign(ncols_, 0.0);
    up_.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < nstruct_; ++j) {
      cost_[j] = model.objective()[j];
      lo_[j] = model.variable(static_cast<int>(j)).lb;
      up_[j] = model.variable(static_cast<int>(j)).ub;
    }

    // columns of [A | I], CSC
    std::vector<int> count(ncols_, 0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (const auto& t : model.constraint(static_cast<int>(i)).terms)
        if (t.coef != 0.0) ++count[static_cast<std::size_t>(t.var)];
    col_ptr_.assign(ncols_ + 1, 0);
    for (std::size_t j = 0; j < nstruct_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
    for (std::size_t j = nstruct_; j < ncols_; ++j) col_ptr_[j + 1] = col_ptr_[j] + 1;
    col_row_.resize(static_cast<std::size_t>(col_ptr_[ncols_]));
    col_val_.resize(static_cast<std::size_t>(col_ptr_[ncols_]));
    std::vector<int> fill(ncols_, 0);
    rhs_.assign(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto& row = model.constraint(static_cast<int>(i));
      rhs_[i] = row.rhs;
      for (const auto& t : row.terms) {
        if (t.coef == 0.0) continue;
        const auto j = static_cast<std::size_t>(t.var);
        const auto pos = static_cast<std::size_t>(col_ptr_[j] + fill[j]++);
        col_row_[pos] = static_cast<int>(i);
        col_val_[pos] = t.coef;
      }
      const std::size_t sj = nstruct_ + i;
      const auto pos = static_cast<std::size_t>(col_ptr_[sj]);
      col_row_[pos] = static_cast<int>(i);
      col_val_[pos] = 1.0;
      switch (row.sense) {
        case Sense::LE: lo_[sj] = 0.0; up_[sj] = kInfV; break;
        case Sense::GE: lo_[sj] = -kInfV; up_[sj] = 0.0; break;
        case Sense::EQ: lo_[sj] = 0.0; up_[sj] = 0.0; break;
      }
    }

    x_.assign(ncols_, 0.0);
    d_.assign(ncols_, 0.0);
    status_.assign(ncols_, kAtLower);
    basic_.assign(rows_, 0);
    w_.assign(rows_, 0.0);
    rho_.assign(rows_, 0.0);
    alpha_.assign(ncols_, 0.0);
    devex_.assign(ncols_, 1.0);
    dual_w_.assign(rows_, 1.0);
    binv_.assign(rows_ * rows_, 0.0);
  }

  SolveStatus solve_no_rows() {
    for (std::size_t j = 0; j < ncols_; ++j) {
      const double c = cost_[j];
      if (is_fixed(j)) { x_[j] = lo_[j]; status_[j] = kAtLower; continue; }
      if (c > 0.0) {
        if (!std::isfinite(lo_[j])) return SolveStatus::kUnbounded;
        x_[j] = lo_[j]; status_[j] = kAtLower;
      } else if (c < 0.0) {
        if (!std::isfinite(up_[j])) return SolveStatus::kUnbounded;
        x_[j] = up_[j]; status_[j] = kAtUpper;
      } else {
        if (std::isfinite(lo_[j])) { x_[j] = lo_[j]; status_[j] = kAtLower; }
        else if (std::isfinite(up_[j])) { x_[j] = up_[j]; status_[j] = kAtUpper; }
        else { x_[j] = 0.0; status_[j] = kFreeZero; }
      }
    }
    return SolveStatus::kOptimal;
  }

  bool is_fixed(std::size_t j) const { return up_[j] - lo_[j] <= 1e-14; }

  void reset_to_slack_basis() {
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      basic_[i] = static_cast<int>(nstruct_ + i);
      binv_[i * rows_ + i] = 1.0;  // column i, row i
      status_[nstruct_ + i] = kBasic;
    }
    std::fill(devex_.begin(), devex_.end(), 1.0);
    std::fill(dual_w_.begin(), dual_w_.end(), 1.0);
    since_rebuild_ = 0;
  }

  bool dual_start_possible() const {
    for (std::size_t j = 0; j < nstruct_; ++j) {
      if (is_fixed(j)) continue;
      const double c = cost_[j];
      if (c > 1e-12 && !std::isfinite(lo_[j])) return false;
      if (c < -1e-12 && !std::isfinite(up_[j])) return false;
    }
    return true;
  }

  // Rest every structural column on its cost-favored bound; zero-cost boxed
  // columns go to whichever bound adds less row violation (greedy, in index
  // order), which shortens the dual phase without affecting correctness.
  void place_nonbasic_for_dual_start() {
    std::vector<double> act(rows_, 0.0);
    std::vector<std::size_t> undecided;
    for (std::size_t j = 0; j < nstruct_; ++j) {
      const double c = cost_[j];
      if (is_fixed(j)) { set_nonbasic(j, kAtLower); add_activity(act, j, x_[j]); continue; }
      if (c > 1e-12) { set_nonbasic(j, kAtLower); add_activity(act, j, x_[j]); }
      else if (c < -1e-12) { set_nonbasic(j, kAtUpper); add_activity(act, j, x_[j]); }
      else if (!std::isfinite(lo_[j]) && !std::isfinite(up_[j])) { status_[j] = kFreeZero; x_[j] = 0.0; }
      else if (!std::isfinite(up_[j])) { set_nonbasic(j, kAtLower); add_activity(act, j, x_[j]); }
      else if (!std::isfinite(lo_[j])) { set_nonbasic(j, kAtUpper); add_activity(act, j, x_[j]); }
      else undecided.push_back(j);
    }
    for (std::size_t j : undecided) {
      const double v_lo = placement_violation(act, j, lo_[j]);
      const double v_up = placement_violation(act, j, up_[j]);
      set_nonbasic(j, v_up < v_lo ? kAtUpper : kAtLower);
      add_activity(act, j, x_[j]);
    }
  }

  void place_nonbasic_primal_default() {
    for (std::size_t j = 0; j < nstruct_; ++j) {
      if (std::isfinite(lo_[j])) set_nonbasic(j, kAtLower);
      else if (std::isfinite(up_[j])) set_nonbasic(j, kAtUpper);
      else { status_[j] = kFreeZero; x_[j] = 0.0; }
    }
  }

  // Abandon the current basis entirely: every column moves to its nearest
  // bound and the slacks re-enter. Last-resort recovery from a basis the
  // refactorization finds singular.
  void cold_restart_basis() {
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] != kBasic) continue;
      if (std::isfinite(lo_[j]) && std::isfinite(up_[j]))
        set_nonbasic(j, x_[j] - lo_[j] <= up_[j] - x_[j] ? kAtLower : kAtUpper);
      else if (std::isfinite(lo_[j])) set_nonbasic(j, kAtLower);
      else if (std::isfinite(up_[j])) set_nonbasic(j, kAtUpper);
      else { status_[j] = kFreeZero; x_[j] = 0.0; }
    }
    reset_to_slack_basis();
    recompute_x();
  }

  void set_nonbasic(std::size_t j, ColStatus st) {
    status_[j] = st;
    x_[j] = (st == kAtUpper) ? up_[j] : lo_[j];
  }

  void add_activity(std::vector<double>& act, std::size_t j, double xj) const {
    if (xj == 0.0) return;
    for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
      act[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] +=
          col_val_[static_cast<std::size_t>(k)] * xj;
  }

  double placement_violation(const std::vector<double>& act, std::size_t j, double xj) const {
    double v = 0.0;
    for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      const auto i = static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)]);
      const double s = rhs_[i] - (act[i] + col_val_[static_cast<std::size_t>(k)] * xj);
      const std::size_t sj = nstruct_ + i;
      if (s < lo_[sj]) v += lo_[sj] - s;
      if (s > up_[sj]) v += s - up_[sj];
    }
    return v;
  }

  // Deterministic per-column cost nudges, signed so that the current rest
  // positions stay dual feasible. The dual loop then sees distinct ratios
  // instead of a sea of exact zeros; certify() re-derives everything from
  // the true costs afterwards.
  void perturb_costs() {
    saved_cost_ = cost_;
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (is_fixed(j) || status_[j] == kFreeZero) continue;
      std::uint64_t h = (static_cast<std::uint64_t>(j) + 1) * 0x9E3779B97F4A7C15ull;
      h ^= h >> 31;
      const double xi = 0.5 + static_cast<double>(h & 0x3FF) / 1024.0;
      const double eps = 1e-7 * (1.0 + std::fabs(cost_[j])) * xi;
      if (status_[j] == kAtUpper) cost_[j] -= eps;
      else cost_[j] += eps;
    }
  }

  void restore_costs() {
    if (!saved_cost_.empty()) cost_ = saved_cost_;
    saved_cost_.clear();
  }

  void snap_nonbasic_into_bounds() {
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] == kBasic) continue;
      if (status_[j] == kFreeZero) { x_[j] = 0.0; continue; }
      if (status_[j] == kAtLower && !std::isfinite(lo_[j]))
        status_[j] = std::isfinite(up_[j]) ? kAtUpper : kFreeZero;
      if (status_[j] == kAtUpper && !std::isfinite(up_[j]))
        status_[j] = std::isfinite(lo_[j]) ? kAtLower : kFreeZero;
      x_[j] = (status_[j] == kAtUpper) ? up_[j] : (status_[j] == kAtLower ? lo_[j] : 0.0);
    }
  }

  // x_B = Binv (b - N x_N)
  void recompute_x() {
    std::vector<double> t(rhs_);
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] == kBasic) continue;
      const double xj = x_[j];
      if (xj == 0.0) continue;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        t[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] -=
            col_val_[static_cast<std::size_t>(k)] * xj;
    }
    std::vector<double> xb(rows_, 0.0);
    for (std::size_t k = 0; k < rows_; ++k) {
      const double tk = t[k];
      if (tk == 0.0) continue;
      const double* col = &binv_[k * rows_];
      for (std::size_t i = 0; i < rows_; ++i) xb[i] += tk * col[i];
    }
    for (std::size_t i = 0; i < rows_; ++i) x_[static_cast<std::size_t>(basic_[i])] = xb[i];
  }

  // d_j = c_j - y' a_j with y = c_B' Binv, recomputed exactly.
  void reset_reduced_costs() {
    std::vector<double> y(rows_, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < rows_; ++i)
      if (cost_[static_cast<std::size_t>(basic_[i])] != 0.0) { any = true; break; }
    if (any) {
      for (std::size_t k = 0; k < rows_; ++k) {
        double acc = 0.0;
        const double* col = &binv_[k * rows_];
        for (std::size_t i = 0; i < rows_; ++i) {
          const double cb = cost_[static_cast<std::size_t>(basic_[i])];
          if (cb != 0.0) acc += cb * col[i];
        }
        y[k] = acc;
      }
    }
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] == kBasic) { d_[j] = 0.0; continue; }
      double dj = cost_[j];
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        dj -= y[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] *
              col_val_[static_cast<std::size_t>(k)];
      d_[j] = dj;
    }
  }

  // w = Binv a_q
  void ftran(std::size_t q) {
    std::fill(w_.begin(), w_.end(), 0.0);
    for (int k = col_ptr_[q]; k < col_ptr_[q + 1]; ++k) {
      const double v = col_val_[static_cast<std::size_t>(k)];
      const double* col = &binv_[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)]) * rows_];
      for (std::size_t i = 0; i < rows_; ++i) w_[i] += v * col[i];
    }
    wnnz_.clear();
    for (std::size_t i = 0; i < rows_; ++i)
      if (std::fabs(w_[i]) > 1e-12) wnnz_.push_back(i);
  }

  // rho = row r of Binv
  void btran(std::size_t r) {
    for (std::size_t k = 0; k < rows_; ++k) rho_[k] = binv_[k * rows_ + r];
  }

  // Checks rho against the definition e_r = rho * B, column by column.
  bool rho_accurate(std::size_t r) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto j = static_cast<std::size_t>(basic_[i]);
      double dot = 0.0;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        dot += rho_[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] *
               col_val_[static_cast<std::size_t>(k)];
      const double want = (i == r) ? 1.0 : 0.0;
      if (std::fabs(dot - want) > 1e-7) return false;
    }
    return true;
  }

  // Basic value of the current pivot row, derived from rho alone:
  // x_Br = rho . (b - N x_N).
  double value_from_rho() const {
    std::vector<double> t(rhs_);
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] == kBasic) continue;
      const double xj = x_[j];
      if (xj == 0.0) continue;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        t[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] -=
            col_val_[static_cast<std::size_t>(k)] * xj;
    }
    double v = 0.0;
    for (std::size_t k = 0; k < rows_; ++k) v += rho_[k] * t[k];
    return v;
  }

  // alpha_j = rho' a_j for every nonbasic column (dense scratch).
  void compute_alpha_row() {
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (status_[j] == kBasic) { alpha_[j] = 0.0; continue; }
      double a = 0.0;
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        a += rho_[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] *
             col_val_[static_cast<std::size_t>(k)];
      alpha_[j] = a;
    }
  }

  // Rank-1 basis-inverse update for entering column q at pivot row r.
  // Requires w_ = Binv a_q and rho_ = old row r of Binv.
  void update_binv(std::size_t r) {
    const double piv = w_[r];
    for (std::size_t k = 0; k < rows_; ++k) {
      const double f = rho_[k];
      if (f == 0.0) continue;
      const double scale = f / piv;
      double* col = &binv_[k * rows_];
      for (const std::size_t i : wnnz_) col[i] -= scale * w_[i];
      col[r] = scale;
    }
    ++since_rebuild_;
  }

  // Refactorize, then rebuild every derived quantity. Returns false only if
  // the basis matrix itself is singular to working precision.
  bool refresh_from_scratch() {
    if (!rebuild_binv()) return false;
    since_rebuild_ = 0;
    recompute_x();
    reset_reduced_costs();
    return true;
  }

  void pivot_bookkeeping(std::size_t r, std::size_t q, ColStatus leaving_to) {
    const auto leave = static_cast<std::size_t>(basic_[r]);
    status_[leave] = leaving_to;
    x_[leave] = (leaving_to == kAtUpper) ? up_[leave] : lo_[leave];
    basic_[r] = static_cast<int>(q);
    status_[q] = kBasic;
  }

  // Reduced-cost update after a pivot: d_j -= theta * alpha_j. The leaving
  // variable has alpha = 1 in its own basis row, so its new reduced cost is
  // exactly -theta. Call after pivot_bookkeeping.
  void update_reduced_costs(std::size_t leave, std::size_t q, double theta) {
    if (theta != 0.0) {
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || j == q || j == leave) continue;
        if (alpha_[j] != 0.0) d_[j] -= theta * alpha_[j];
      }
    }
    d_[leave] = -theta;
    d_[q] = 0.0;
  }

  double primal_infeasibility() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto b = static_cast<std::size_t>(basic_[i]);
      if (x_[b] < lo_[b]) s += lo_[b] - x_[b];
      else if (x_[b] > up_[b]) s += x_[b] - up_[b];
    }
    return s;
  }

  // ---- dual simplex ----------------------------------------------------

  SolveStatus dual_loop() {
    const long cap = iterations_ + iteration_cap();
    long stall = 0;
    double best_inf = std::numeric_limits<double>::max();
    long since_refresh = 0;
    bool fresh = false;  // x recomputed since the last pivot
    while (true) {
      if (++iterations_ > cap) return SolveStatus::kNumericalFailure;
      if (++since_refresh >= 1024) {
        since_refresh = 0;
        if (since_rebuild_ >= 1500) {
          if (!refresh_from_scratch()) return SolveStatus::kNumericalFailure;
        } else {
          recompute_x();
          reset_reduced_costs();
        }
        fresh = true;
      }

      // leaving row: worst bound violation, devex-weighted
      std::size_t r = rows_;
      bool below = false;
      double best_score = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const auto b = static_cast<std::size_t>(basic_[i]);
        double viol = 0.0;
        bool bel = false;
        if (x_[b] < lo_[b] - feas_tol_) { viol = lo_[b] - x_[b]; bel = true; }
        else if (x_[b] > up_[b] + feas_tol_) { viol = x_[b] - up_[b]; }
        else continue;
        const double score = viol * viol / dual_w_[i];
        if (score > best_score) { best_score = score; r = i; below = bel; }
      }
      if (r == rows_) {
        // conclude only from freshly recomputed values
        if (!fresh) {
          recompute_x();
          fresh = true;
          continue;
        }
        return SolveStatus::kOptimal;  // primal feasible
      }
      fresh = false;

      const double inf_now = primal_infeasibility();
      if (inf_now < best_inf - 1e-10) { best_inf = inf_now; stall = 0; }
      else if (++stall > 12000) return SolveStatus::kNumericalFailure;

      btran(r);
      compute_alpha_row();

      // entering column by dual ratio test (Harris-style tie handling)
      const auto rb = static_cast<std::size_t>(basic_[r]);
      const double delta_r = below ? lo_[rb] - x_[rb] : up_[rb] - x_[rb];
      std::size_t q = ncols_;
      double theta_star = 0.0;
      bool have = false;
      // pass 1: extreme admissible theta over usable pivots
      constexpr double kPivTol = 1e-8;
      bool eligible_any = false;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double a = alpha_[j];
        if (std::fabs(a) < 1e-12 || !eligible_dual(j, a, below)) continue;
        eligible_any = true;
        if (std::fabs(a) < kPivTol) continue;
        const double th = d_[j] / a;
        if (!have) { theta_star = th; have = true; }
        else if (below ? th > theta_star : th < theta_star) theta_star = th;
      }
      if (!have) {
        // an infeasibility certificate is only as good as the tableau row it
        // came from; verify rho directly against the basis columns (cheap)
        // and re-derive the violated value from it before believing it
        if (rho_accurate(r)) {
          const double xr = value_from_rho();
          const auto rb2 = static_cast<std::size_t>(basic_[r]);
          if (xr >= lo_[rb2] - feas_tol_ && xr <= up_[rb2] + feas_tol_) {
            x_[rb2] = xr;  // stale incremental value, not a real violation
            continue;
          }
          if (!eligible_any) return SolveStatus::kInfeasible;
        }
        if (since_rebuild_ > 0) {
          if (!refresh_from_scratch()) return SolveStatus::kNumericalFailure;
          fresh = true;
          continue;
        }
        return eligible_any ? SolveStatus::kNumericalFailure : SolveStatus::kInfeasible;
      }
      // pass 2: among near-ties pick the largest pivot magnitude; widen the
      // tie band when only unstable pivots fall inside it
      for (double band : {1e-9, 1e-7, 1e-5}) {
        const double tol = band * (1.0 + std::fabs(theta_star));
        double best_piv = 0.0;
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (status_[j] == kBasic || is_fixed(j)) continue;
          const double a = alpha_[j];
          if (std::fabs(a) < kPivTol) continue;
          if (!eligible_dual(j, a, below)) continue;
          const double th = d_[j] / a;
          const bool near = below ? th >= theta_star - tol : th <= theta_star + tol;
          if (near && std::fabs(a) > best_piv) { best_piv = std::fabs(a); q = j; }
        }
        if (best_piv >= 1e-6) break;
      }
      if (q == ncols_) return SolveStatus::kNumericalFailure;

      const double theta = d_[q] / alpha_[q];
      ftran(q);
      if (std::fabs(w_[r] - alpha_[q]) > 1e-6 * (1.0 + std::fabs(alpha_[q]))) {
        // basis inverse has drifted; rebuild once and retry the iteration
        if (!rebuild_binv()) return SolveStatus::kNumericalFailure;
        recompute_x();
        reset_reduced_costs();
        continue;
      }

      const double step = -delta_r / alpha_[q];
      x_[q] += step;
      for (const std::size_t i : wnnz_) {
        const auto b = static_cast<std::size_t>(basic_[i]);
        x_[b] -= step * w_[i];
      }

      // dual devex weight updates (approximate reference framework)
      const double wr = w_[r];
      const double gr = std::max(dual_w_[r] / (wr * wr), 1.0);
      for (const std::size_t i : wnnz_) {
        if (i == r) continue;
        const double ratio = w_[i] / wr;
        dual_w_[i] = std::max(dual_w_[i], ratio * ratio * dual_w_[r]);
      }
      dual_w_[r] = gr;
      if (gr > 1e8) std::fill(dual_w_.begin(), dual_w_.end(), 1.0);

      const auto leave = static_cast<std::size_t>(basic_[r]);
      update_binv(r);
      pivot_bookkeeping(r, q, below ? kAtLower : kAtUpper);
      update_reduced_costs(leave, q, theta);
    }
  }

  bool eligible_dual(std::size_t j, double a, bool below) const {
    const auto st = static_cast<ColStatus>(status_[j]);
    if (st == kFreeZero) return true;
    if (below) {
      if (st == kAtLower) return a < 0.0;
      return a > 0.0;  // at upper
    }
    if (st == kAtLower) return a > 0.0;
    return a < 0.0;
  }

  // ---- primal simplex ---------------------------------------------------

  SolveStatus primal_phase2() {
    const long cap = iterations_ + iteration_cap();
    long stall = 0;
    double best_obj = std::numeric_limits<double>::max();
    long since_refresh = 0;
    bool bland = false;
    bool fresh = false;  // d recomputed since the last pivot
    while (true) {
      if (++iterations_ > cap) return SolveStatus::kNumericalFailure;
      if (++since_refresh >= 1024) {
        since_refresh = 0;
        if (since_rebuild_ >= 1500) {
          if (!refresh_from_scratch()) return SolveStatus::kNumericalFailure;
        } else {
          recompute_x();
          reset_reduced_costs();
        }
        fresh = true;
      }

      // entering column
      std::size_t q = ncols_;
      int sigma = +1;
      double best_score = 0.0;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double dj = d_[j];
        int s = 0;
        if (status_[j] == kAtLower && dj < -opt_tol_) s = +1;
        else if (status_[j] == kAtUpper && dj > opt_tol_) s = -1;
        else if (status_[j] == kFreeZero && std::fabs(dj) > opt_tol_) s = dj < 0.0 ? +1 : -1;
        if (s == 0) continue;
        if (bland) { q = j; sigma = s; break; }
        const double score = dj * dj / devex_[j];
        if (score > best_score) { best_score = score; q = j; sigma = s; }
      }
      if (q == ncols_) {
        if (!fresh) {
          recompute_x();
          reset_reduced_costs();
          fresh = true;
          continue;
        }
        return SolveStatus::kOptimal;
      }
      fresh = false;

      ftran(q);
      const double own_range = up_[q] - lo_[q];  // inf allowed
      double limit = std::isfinite(own_range) ? own_range : kInfV;
      std::size_t block = rows_;  // rows_ means "own bound"
      // first pass: smallest ratio
      for (const std::size_t i : wnnz_) {
        const double rate = -sigma * w_[i];
        const auto b = static_cast<std::size_t>(basic_[i]);
        double room, ratio;
        if (rate > 1e-11) {
          if (!std::isfinite(up_[b])) continue;
          room = up_[b] - x_[b];
          ratio = std::max(room, 0.0) / rate;
        } else if (rate < -1e-11) {
          if (!std::isfinite(lo_[b])) continue;
          room = x_[b] - lo_[b];
          ratio = std::max(room, 0.0) / (-rate);
        } else continue;
        if (ratio < limit) { limit = ratio; block = i; }
      }
      if (!std::isfinite(limit)) {
        // like infeasibility, an unboundedness ray is only trusted fresh
        if (since_rebuild_ > 0) {
          if (!refresh_from_scratch()) return SolveStatus::kNumericalFailure;
          fresh = true;
          continue;
        }
        return SolveStatus::kUnbounded;
      }
      // second pass: among near-ties prefer the largest pivot element
      if (block != rows_) {
        const double tol = 1e-9 * (1.0 + limit);
        double best_piv = std::fabs(w_[block]);
        for (const std::size_t i : wnnz_) {
          const double rate = -sigma * w_[i];
          const auto b = static_cast<std::size_t>(basic_[i]);
          double ratio;
          if (rate > 1e-11) {
            if (!std::isfinite(up_[b])) continue;
            ratio = std::max(up_[b] - x_[b], 0.0) / rate;
          } else if (rate < -1e-11) {
            if (!std::isfinite(lo_[b])) continue;
            ratio = std::max(x_[b] - lo_[b], 0.0) / (-rate);
          } else continue;
          if (ratio <= limit + tol && std::fabs(w_[i]) > best_piv) {
            best_piv = std::fabs(w_[i]);
            block = i;
            limit = std::min(limit, ratio);
          }
        }
      }

      const double step = std::max(limit, 0.0);
      if (block == rows_) {
        // bound flip, no basis change
        x_[q] += sigma * step;
        status_[q] = (status_[q] == kAtLower) ? kAtUpper : kAtLower;
        for (const std::size_t i : wnnz_)
          x_[static_cast<std::size_t>(basic_[i])] -= sigma * step * w_[i];
        continue;
      }

      const double rate_block = -sigma * w_[block];
      x_[q] += sigma * step;
      for (const std::size_t i : wnnz_)
        x_[static_cast<std::size_t>(basic_[i])] -= sigma * step * w_[i];

      btran(block);
      compute_alpha_row();
      const double theta = d_[q] / w_[block];

      // primal devex updates
      const double piv = w_[block];
      const double ref = devex_[q];
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || j == q) continue;
        const double a = alpha_[j];
        if (a == 0.0) continue;
        const double cand = (a / piv) * (a / piv) * ref;
        if (cand > devex_[j]) devex_[j] = cand;
      }
      const auto leave = static_cast<std::size_t>(basic_[block]);
      update_binv(block);
      pivot_bookkeeping(block, q, rate_block > 0.0 ? kAtUpper : kAtLower);
      update_reduced_costs(leave, q, theta);
      devex_[leave] = std::max(ref / (piv * piv), 1.0);
      if (devex_[leave] > 1e8) std::fill(devex_.begin(), devex_.end(), 1.0);

      const double obj = objective();
      if (obj < best_obj - 1e-10) { best_obj = obj; stall = 0; bland = false; }
      else if (++stall > 2000) { bland = true; }
    }
  }

  // Minimizes total bound violation of the basics. Backstop path; reduced
  // costs are rebuilt every iteration from the current infeasibility set.
  SolveStatus primal_phase1() {
    const long cap = iterations_ + iteration_cap();
    long stall = 0;
    double best_inf = std::numeric_limits<double>::max();
    bool bland = false;
    std::vector<double> y(rows_);
    while (true) {
      if (++iterations_ > cap) return SolveStatus::kNumericalFailure;

      double inf = 0.0;
      std::fill(y.begin(), y.end(), 0.0);
      bool any = false;
      for (std::size_t i = 0; i < rows_; ++i) {
        const auto b = static_cast<std::size_t>(basic_[i]);
        double cb = 0.0;
        if (x_[b] < lo_[b] - feas_tol_) { cb = -1.0; inf += lo_[b] - x_[b]; }
        else if (x_[b] > up_[b] + feas_tol_) { cb = +1.0; inf += x_[b] - up_[b]; }
        if (cb == 0.0) continue;
        any = true;
        for (std::size_t k = 0; k < rows_; ++k) y[k] += cb * binv_[k * rows_ + i];
      }
      if (!any) return SolveStatus::kOptimal;  // primal feasible
      if (inf < best_inf - 1e-10) { best_inf = inf; stall = 0; bland = false; }
      else if (++stall > 2000) bland = true;

      // entering by synthetic reduced cost -y' a_j
      std::size_t q = ncols_;
      int sigma = +1;
      double best = bland ? 0.0 : 1e-9;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        double dj = 0.0;
        for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
          dj -= y[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] *
                col_val_[static_cast<std::size_t>(k)];
        int s = 0;
        if (status_[j] == kAtLower && dj < -1e-9) s = +1;
        else if (status_[j] == kAtUpper && dj > 1e-9) s = -1;
        else if (status_[j] == kFreeZero && std::fabs(dj) > 1e-9) s = dj < 0.0 ? +1 : -1;
        if (s == 0) continue;
        if (bland) { q = j; sigma = s; break; }
        if (std::fabs(dj) > best) { best = std::fabs(dj); q = j; sigma = s; }
      }
      if (q == ncols_) {
        if (since_rebuild_ > 0) {
          if (!refresh_from_scratch()) return SolveStatus::kNumericalFailure;
          continue;
        }
        return SolveStatus::kInfeasible;
      }

      ftran(q);
      double limit = std::isfinite(up_[q] - lo_[q]) ? up_[q] - lo_[q] : kInfV;
      std::size_t block = rows_;
      for (const std::size_t i : wnnz_) {
        const double rate = -sigma * w_[i];
        const auto b = static_cast<std::size_t>(basic_[i]);
        if (std::fabs(rate) < 1e-11) continue;
        double ratio = kInfV;
        if (x_[b] < lo_[b] - feas_tol_) {
          // infeasible below: blocks when it reaches its lower bound
          if (rate > 0.0) ratio = (lo_[b] - x_[b]) / rate;
        } else if (x_[b] > up_[b] + feas_tol_) {
          if (rate < 0.0) ratio = (x_[b] - up_[b]) / (-rate);
        } else {
          if (rate > 0.0 && std::isfinite(up_[b])) ratio = std::max(up_[b] - x_[b], 0.0) / rate;
          else if (rate < 0.0 && std::isfinite(lo_[b])) ratio = std::max(x_[b] - lo_[b], 0.0) / (-rate);
        }
        if (ratio < limit) { limit = ratio; block = i; }
      }
      if (!std::isfinite(limit)) {
        // driving infeasibility down without bound: numerically degenerate
        return SolveStatus::kNumericalFailure;
      }
      const double step = std::max(limit, 0.0);
      if (block == rows_) {
        x_[q] += sigma * step;
        status_[q] = (status_[q] == kAtLower) ? kAtUpper : kAtLower;
        for (const std::size_t i : wnnz_)
          x_[static_cast<std::size_t>(basic_[i])] -= sigma * step * w_[i];
        continue;
      }
      const double rate_block = -sigma * w_[block];
      const auto bb = static_cast<std::size_t>(basic_[block]);
      const bool was_below = x_[bb] < lo_[bb] - feas_tol_;
      x_[q] += sigma * step;
      for (const std::size_t i : wnnz_)
        x_[static_cast<std::size_t>(basic_[i])] -= sigma * step * w_[i];
      btran(block);
      update_binv(block);
      ColStatus to;
      if (was_below) to = kAtLower;
      else if (x_[bb] > up_[bb] + feas_tol_) to = kAtUpper;
      else to = rate_block > 0.0 ? kAtUpper : kAtLower;
      pivot_bookkeeping(block, q, to);
    }
  }

  // ---- certification ----------------------------------------------------

  SolveStatus certify(SolveStatus st) {
    if (st != SolveStatus::kOptimal) return st;
    bool cold_retried = false;
    for (int round = 0; round < 8; ++round) {
      recompute_x();
      // judge only from a trustworthy inverse
      if (equality_residual() > 1e-7 && since_rebuild_ > 0) {
        if (!refresh_from_scratch()) {
          if (cold_retried) return SolveStatus::kNumericalFailure;
          cold_retried = true;
          cold_restart_basis();
          perturb_costs();
          reset_reduced_costs();
          const SolveStatus st2 = dual_loop();
          restore_costs();
          if (st2 != SolveStatus::kOptimal) return st2;
          continue;
        }
      }
      reset_reduced_costs();
      bool primal_ok = true;
      double worst_p = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const auto b = static_cast<std::size_t>(basic_[i]);
        const double scale = 1.0 + (std::isfinite(lo_[b]) ? std::fabs(lo_[b]) : 0.0) +
                             (std::isfinite(up_[b]) ? std::fabs(up_[b]) : 0.0);
        const double v =
            std::max(lo_[b] - x_[b], x_[b] - up_[b]) / scale;
        if (v > worst_p) worst_p = v;
        if (v > 10.0 * feas_tol_) primal_ok = false;
      }
      bool dual_ok = true;
      double worst_d = 0.0;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double tol = 1e-7 * (1.0 + std::fabs(cost_[j]));
        double v = 0.0;
        if (status_[j] == kAtLower) v = -d_[j];
        else if (status_[j] == kAtUpper) v = d_[j];
        else if (status_[j] == kFreeZero) v = std::fabs(d_[j]);
        if (v > worst_d) worst_d = v;
        if (v > tol) dual_ok = false;
      }
      if (debug_certify)
        std::fprintf(stderr, "certify round %d: primal_ok=%d (%.3e) dual_ok=%d (%.3e)\n",
                     round, static_cast<int>(primal_ok), worst_p,
                     static_cast<int>(dual_ok), worst_d);
      if (primal_ok && dual_ok) {
        if (equality_residual() > 1e-6) {
          if (!rebuild_binv()) return SolveStatus::kNumericalFailure;
          continue;
        }
        return SolveStatus::kOptimal;
      }
      SolveStatus s2;
      if (primal_ok) {
        s2 = primal_phase2();
      } else {
        perturb_costs();
        reset_reduced_costs();
        s2 = dual_loop();
        restore_costs();
      }
      if (s2 != SolveStatus::kOptimal) return s2;
    }
    return SolveStatus::kNumericalFailure;
  }

  // Dense Gauss-Jordan reinversion of the current basis. Rescue path.
  bool rebuild_binv() {
    const std::size_t m = rows_;
    std::vector<double> a(m * m, 0.0);  // column-major basis matrix
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = static_cast<std::size_t>(basic_[i]);
      for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
        a[i * m + static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] =
            col_val_[static_cast<std::size_t>(k)];
    }
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) binv_[i * m + i] = 1.0;
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    // eliminate column by column (a is column-major: a[col*m + row])
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv_row = c;
      double piv = 0.0;
      for (std::size_t r2 = c; r2 < m; ++r2)
        if (std::fabs(a[c * m + r2]) > std::fabs(piv)) { piv = a[c * m + r2]; piv_row = r2; }
      if (std::fabs(piv) < 1e-12) return false;
      if (piv_row != c) {
        for (std::size_t cc = 0; cc < m; ++cc) std::swap(a[cc * m + c], a[cc * m + piv_row]);
        for (std::size_t cc = 0; cc < m; ++cc) std::swap(binv_[cc * m + c], binv_[cc * m + piv_row]);
      }
      const double inv = 1.0 / a[c * m + c];
      for (std::size_t cc = 0; cc < m; ++cc) {
        a[cc * m + c] *= inv;
        binv_[cc * m + c] *= inv;
      }
      for (std::size_t r2 = 0; r2 < m; ++r2) {
        if (r2 == c) continue;
        const double f = a[c * m + r2];
        if (f == 0.0) continue;
        for (std::size_t cc = 0; cc < m; ++cc) {
          a[cc * m + r2] -= f * a[cc * m + c];
          binv_[cc * m + r2] -= f * binv_[cc * m + c];
        }
      }
    }
    return true;
  }

  long iteration_cap() const {
    return 40000 + 80 * static_cast<long>(rows_ + ncols_);
  }

  double feas_tol_;
  double opt_tol_ = 1e-9;
  std::size_t nstruct_ = 0, rows_ = 0, ncols_ = 0;
  double obj_constant_ = 0.0;

  std::vector<int> col_ptr_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> cost_, lo_, up_, rhs_;
  std::vector<double> x_, d_;
  std::vector<signed char> status_;
  std::vector<int> basic_;
  std::vector<double> binv_;
  std::vector<double> w_, rho_, alpha_;
  std::vector<std::size_t> wnnz_;
  std::vector<double> devex_, dual_w_;
  std::vector<double> saved_cost_;
  long iterations_ = 0;
  long since_rebuild_ = 0;
};

// LP relaxation solve: integrality is ignored by construction here.
inline LpSolution solve_lp(const MilpModel& model, const SolveOptions& opts = {}) {
  model.validate();
  opts.validate();
  SimplexEngine eng(model, opts.feasibility_tol);
  LpSolution out;
  const SolveStatus st = eng.solve();
  out.status = st;
  out.iterations = eng.iterations();
  if (st == SolveStatus::kOptimal) {
    out.values = eng.structural_values();
    out.objective = eng.objective();
    out.duals = eng.duals();
  }
  return out;
}

}  // namespace iesched::milp
