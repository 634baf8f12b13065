// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iesched::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, GE, EQ };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  bool integer = false;
};

struct LinTerm {
  int var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<LinTerm> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

// Solver-agnostic model: bounded (possibly integer) variables, sparse linear
// rows, and a linear objective to minimize.
class MilpModel {
 public:
  int add_variable(std::string name, double lb, double ub, bool integer = false) {
    vars_.push_back(Variable{std::move(name), lb, ub, integer});
    obj_.push_back(0.0);
    return static_cast<int>(vars_.size()) - 1;
  }

  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, true); }

  void set_objective(int var, double coef) { obj_.at(static_cast<std::size_t>(var)) = coef; }
  void add_objective(int var, double coef) { obj_.at(static_cast<std::size_t>(var)) += coef; }
  void set_objective_constant(double c) { obj_constant_ = c; }

  int add_constraint(std::string name, std::vector<LinTerm> terms, Sense sense, double rhs) {
    rows_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_var_bounds(int var, double lb, double ub) {
    auto& v = vars_.at(static_cast<std::size_t>(var));
    v.lb = lb;
    v.ub = ub;
  }

  void set_integer(int var, bool flag) {
    vars_.at(static_cast<std::size_t>(var)).integer = flag;
  }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int i) const { return vars_.at(static_cast<std::size_t>(i)); }
  const Constraint& constraint(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_constant_; }

  // Structural invariants: consistent bounds, valid indices, finite rows.
  void validate() const {
    for (const auto& v : vars_) {
      if (v.name.empty()) throw std::invalid_argument("MilpModel: unnamed variable");
      if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
        throw std::invalid_argument("MilpModel: inconsistent bounds on " + v.name);
    }
    for (const auto& r : rows_) {
      if (!std::isfinite(r.rhs))
        throw std::invalid_argument("MilpModel: non-finite rhs on " + r.name);
      for (const auto& t : r.terms) {
        if (t.var < 0 || t.var >= num_vars())
          throw std::invalid_argument("MilpModel: bad variable index in " + r.name);
        if (!std::isfinite(t.coef))
          throw std::invalid_argument("MilpModel: non-finite coefficient in " + r.name);
      }
    }
    for (double c : obj_)
      if (!std::isfinite(c)) throw std::invalid_argument("MilpModel: non-finite objective");
  }

  // Signed violation of one row at a point (positive means violated).
  double row_violation(int i, const std::vector<double>& x) const {
    const auto& r = rows_[static_cast<std::size_t>(i)];
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (r.sense) {
      case Sense::LE: return act - r.rhs;
      case Sense::GE: return r.rhs - act;
      case Sense::EQ: return std::fabs(act - r.rhs);
    }
    return 0.0;
  }

  // Largest constraint/bound violation at a point; used for the independent
  // replay of every solution the solvers hand back.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int i = 0; i < num_constraints(); ++i)
      worst = std::max(worst, row_violation(i, x));
    for (int j = 0; j < num_vars(); ++j) {
      const auto& v = vars_[static_cast<std::size_t>(j)];
      const double xj = x[static_cast<std::size_t>(j)];
      worst = std::max(worst, v.lb - xj);
      worst = std::max(worst, xj - v.ub);
    }
    return worst;
  }

  double objective_value(const std::vector<double>& x) const {
    double v = obj_constant_;
    for (std::size_t j = 0; j < obj_.size(); ++j) v += obj_[j] * x[j];
    return v;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double obj_constant_ = 0.0;
};

struct SolveOptions {
  double mip_gap = 1e-6;        // relative gap at which branch and bound stops
  double time_limit_sec = 0.0;  // 0 = no limit; wall-clock limits trade determinism
  double feasibility_tol = 1e-9;
  long node_limit = 0;          // 0 = no limit

  void validate() const {
    if (!(mip_gap > 0.0) || !(feasibility_tol > 0.0))
      throw std::invalid_argument("SolveOptions: tolerances must be positive");
  }
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kLimitReached,
  kNumericalFailure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kLimitReached: return "limit_reached";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct LpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> values;  // one per structural variable
  std::vector<double> duals;   // one per row
  long iterations = 0;
};

struct MipSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> values;
  double gap = 0.0;
  long nodes = 0;
};

}  // namespace iesched::milp
