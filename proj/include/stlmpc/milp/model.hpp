// Mixed-integer linear model container: variables with bounds, linear
// constraints, and a linear objective. Construction is incremental and
// single-owner; solving happens in milp/solver.hpp.
//
// Variable bounds and constraint right-hand sides may be updated in
// place after construction (same structure), which is what lets the
// epsilon-constraint sweep reuse one model and warm-start the solver.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlmpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };

struct VarRef {
  int id = -1;
  bool valid() const { return id >= 0; }
  bool operator==(const VarRef& o) const { return id == o.id; }
  bool operator<(const VarRef& o) const { return id < o.id; }
};

struct VarInfo {
  VarKind kind = VarKind::Continuous;
  double lower = -kInf;
  double upper = kInf;
  std::string name;
};

class LinExpr {
 public:
  LinExpr() = default;
  /* implicit */ LinExpr(double c) : constant_(c) {}
  /* implicit */ LinExpr(VarRef v) { terms_[v.id] = 1.0; }

  static LinExpr term(VarRef v, double coeff) {
    LinExpr e;
    e.add(v, coeff);
    return e;
  }

  void add(VarRef v, double coeff) {
    if (!v.valid()) throw std::invalid_argument("LinExpr: invalid VarRef");
    if (!std::isfinite(coeff))
      throw std::invalid_argument("LinExpr: non-finite coefficient");
    terms_[v.id] += coeff;
  }
  void add_constant(double c) { constant_ += c; }

  const std::map<int, double>& terms() const { return terms_; }
  double constant() const { return constant_; }

  LinExpr& operator+=(const LinExpr& o) {
    for (const auto& [id, c] : o.terms_) terms_[id] += c;
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    for (const auto& [id, c] : o.terms_) terms_[id] -= c;
    constant_ -= o.constant_;
    return *this;
  }
  LinExpr& operator*=(double s) {
    for (auto& [id, c] : terms_) c *= s;
    constant_ *= s;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  double eval(const std::vector<double>& values) const {
    double v = constant_;
    for (const auto& [id, c] : terms_) v += c * values[static_cast<std::size_t>(id)];
    return v;
  }

 private:
  std::map<int, double> terms_;
  double constant_ = 0.0;
};

enum class Relation { Le, Eq, Ge };
enum class ObjSense { Minimize, Maximize };

struct Constraint {
  LinExpr expr;
  Relation rel = Relation::Le;
  double rhs = 0.0;
  std::string name;
};

enum class MilpStatus { Optimal, Infeasible, Unbounded, NodeLimit };

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<double> values;  // indexed by VarRef::id; empty if none found
  double objective_value = 0.0;
  double best_bound = -kInf;  // proven bound in the minimize sense
  long nodes_explored = 0;

  double value(VarRef v) const { return values[static_cast<std::size_t>(v.id)]; }
};

struct SolverConfig {
  double feas_tol = 1e-6;
  double int_tol = 1e-6;
  double gap_tol = 1e-6;  // relative
  long node_limit = 200000;
  double big_M = 1e4;

  // Optional rounding heuristic: mutates an LP-relaxation point toward an
  // integral candidate; the solver verifies feasibility before accepting.
  std::function<void(std::vector<double>&)> repair;
  // Objective value of a known feasible point, used as the initial
  // incumbent bound (warm start between related solves).
  double initial_incumbent = kInf;

  void validate() const {
    if (!(feas_tol > 0 && int_tol > 0 && gap_tol > 0 && node_limit > 0 &&
          big_M > 0))
      throw std::invalid_argument("SolverConfig: all fields must be positive");
  }
};

class MilpModel {
 public:
  VarRef add_var(VarKind kind, double lower, double upper,
                 std::string name = "") {
    if (kind == VarKind::Binary) {
      lower = 0.0;
      upper = 1.0;
    }
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
      throw std::invalid_argument("add_var: invalid bounds");
    if (name.empty()) name = "x" + std::to_string(vars_.size());
    vars_.push_back({kind, lower, upper, std::move(name)});
    return {static_cast<int>(vars_.size()) - 1};
  }

  int add_constraint(LinExpr expr, Relation rel, double rhs,
                     std::string name = "") {
    check_expr(expr);
    if (std::isnan(rhs))
      throw std::invalid_argument("add_constraint: NaN right-hand side");
    if (name.empty()) name = "c" + std::to_string(cons_.size());
    cons_.push_back({std::move(expr), rel, rhs, std::move(name)});
    return static_cast<int>(cons_.size()) - 1;
  }

  void set_objective(ObjSense sense, LinExpr expr) {
    check_expr(expr);
    sense_ = sense;
    objective_ = std::move(expr);
  }

  // In-place updates preserving structure (see header comment).
  void set_var_bounds(VarRef v, double lower, double upper) {
    check_var(v);
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
      throw std::invalid_argument("set_var_bounds: invalid bounds");
    vars_[static_cast<std::size_t>(v.id)].lower = lower;
    vars_[static_cast<std::size_t>(v.id)].upper = upper;
  }
  void set_constraint_rhs(int idx, double rhs) {
    if (idx < 0 || idx >= num_constraints())
      throw std::out_of_range("set_constraint_rhs: bad index");
    if (std::isnan(rhs)) throw std::invalid_argument("NaN right-hand side");
    cons_[static_cast<std::size_t>(idx)].rhs = rhs;
  }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  const VarInfo& var(VarRef v) const {
    check_var(v);
    return vars_[static_cast<std::size_t>(v.id)];
  }
  const VarInfo& var(int id) const { return var(VarRef{id}); }
  const std::vector<VarInfo>& vars() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  ObjSense objective_sense() const { return sense_; }
  const LinExpr& objective() const { return objective_; }

  // Interval-arithmetic range of expr over the variable box.
  std::pair<double, double> expr_range(const LinExpr& expr) const {
    double lo = expr.constant(), hi = expr.constant();
    for (const auto& [id, c] : expr.terms()) {
      const VarInfo& vi = var(id);
      if (c >= 0) {
        lo += c * vi.lower;
        hi += c * vi.upper;
      } else {
        lo += c * vi.upper;
        hi += c * vi.lower;
      }
    }
    return {lo, hi};
  }

  // Max violation of all constraints and bounds at a point.
  double max_violation(const std::vector<double>& values) const;

  // LP text format dump for cross-checking against external solvers.
  void write_lp(std::ostream& os) const;

 private:
  void check_var(VarRef v) const {
    if (!v.valid() || v.id >= num_vars())
      throw std::invalid_argument("MilpModel: foreign or invalid VarRef");
  }
  void check_expr(const LinExpr& e) const {
    for (const auto& [id, c] : e.terms()) {
      check_var(VarRef{id});
      if (!std::isfinite(c))
        throw std::invalid_argument("MilpModel: non-finite coefficient");
    }
    if (!std::isfinite(e.constant()))
      throw std::invalid_argument("MilpModel: non-finite constant");
  }

  std::vector<VarInfo> vars_;
  std::vector<Constraint> cons_;
  ObjSense sense_ = ObjSense::Minimize;
  LinExpr objective_;
};

}  // namespace stlmpc
