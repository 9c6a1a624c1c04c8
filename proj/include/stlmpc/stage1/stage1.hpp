// Feasibility restoration layer. Builds one MILP per control cycle over
// the affine vehicle model and the encoded robustness of every spec, then
// answers two questions on that shared model:
//   solve_nominal       — is the full spec set jointly satisfiable, and
//                         what does the nominal controller do?
//   restore_feasibility — if not, what is the minimal total L1 relaxation
//                         of the soft specs, and a trajectory achieving it?
// Hard specs are never relaxed. The MpcMilp object is reusable: bounds,
// right-hand sides, and the objective mutate in place so later solves on
// the same cycle warm-start the solver.

#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stlmpc/dynamics/bicycle.hpp"
#include "stlmpc/milp/encoder.hpp"
#include "stlmpc/milp/solver.hpp"
#include "stlmpc/stl/robustness.hpp"

namespace stlmpc {

struct NamedFormula {
  std::string name;
  FormulaPtr formula;
};

struct SpecSet {
  std::vector<NamedFormula> hard;
  std::vector<NamedFormula> soft;  // order fixes delta indexing

  void validate() const;
};

// Linear nominal stage cost: w_input * sum_t |u_t|_1 plus a goal-progress
// term -w_goal * (goal_dir . p_T).
struct NominalObjective {
  double w_input = 1.0;
  double w_goal = 0.0;
  double goal_dir_x = 1.0;
  double goal_dir_y = 0.0;
};

struct MpcProblem {
  TimeGrid horizon;
  VehicleState x0;
  VehicleParams params;
  std::vector<AffineStep> linear_model;  // horizon.steps - 1 entries
  NominalObjective objective;
  // Agent predictions; dims of each trace enter predicates as
  // "<agent>_<dim>" constants (e.g. ped_x).
  std::map<std::string, Trace> exogenous;

  void validate() const;
};

enum class RelaxationStatus { FeasibleStrict, FeasibleRelaxed, HardInfeasible };

struct RelaxationResult {
  RelaxationStatus status = RelaxationStatus::HardInfeasible;
  std::vector<ControlInput> u_star;
  std::vector<VehicleState> x_star;
  std::map<std::string, double> delta_star;
  double delta_min = 0.0;
};

struct NominalResult {
  bool feasible = false;
  std::vector<ControlInput> u;
  std::vector<VehicleState> x;
  double objective = 0.0;
};

// Combined signal (ego dims px,py,theta,v plus exogenous agent dims) for
// monitor-side audits of a planned trajectory.
Trace assemble_trace(const MpcProblem& prob,
                     const std::vector<VehicleState>& states);

// The shared per-cycle MILP. Stage 2 extends the same model with
// surrogate objectives before the first solve.
class MpcMilp {
 public:
  MpcMilp(const MpcProblem& prob, const SpecSet& specs, SolverConfig cfg);

  // Mode switches (in-place mutations).
  void fix_deltas_to_zero();
  void free_deltas();
  void set_budget(double lo, double hi);  // bounds on |delta|_1
  void use_nominal_objective();
  void use_relaxation_objective();

  MilpSolution solve(long node_limit = 0, double initial_incumbent = kInf);

  std::vector<VehicleState> states_of(const MilpSolution& s) const;
  std::vector<ControlInput> inputs_of(const MilpSolution& s) const;
  std::map<std::string, double> deltas_of(const MilpSolution& s) const;

  MilpModel& model() { return model_; }
  const SpecSet& specs() const { return specs_; }
  RobustnessEncoder& encoder() { return *encoder_; }
  EncoderContext& context() { return ctx_; }
  const SolverConfig& config() const { return cfg_; }
  VarRef state_var(int t, int dim) const {
    return x_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(dim)];
  }
  VarRef input_var(int t, int dim) const {
    return u_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(dim)];
  }
  VarRef input_abs_var(int t, int dim) const {
    return u_abs_.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(dim)];
  }
  VarRef rho_var(const std::string& spec_name) const { return rho_.at(spec_name); }
  VarRef delta_var(const std::string& soft_name) const { return delta_.at(soft_name); }
  VarRef delta_sum_var() const { return delta_sum_; }
  int num_steps() const { return steps_; }
  double delta_cap() const { return delta_cap_; }
  const LinExpr& nominal_objective_expr() const { return nominal_obj_; }

 private:
  void ensure_solver();

  const MpcProblem& prob_;
  const SpecSet& specs_;
  SolverConfig cfg_;
  int steps_;
  double delta_cap_;
  MilpModel model_;
  EncoderContext ctx_;
  std::unique_ptr<RobustnessEncoder> encoder_;
  std::vector<std::array<VarRef, 4>> x_;
  std::vector<std::array<VarRef, 2>> u_;
  std::vector<std::array<VarRef, 2>> u_abs_;
  std::map<std::string, VarRef> rho_;
  std::map<std::string, VarRef> delta_;
  VarRef delta_sum_;
  LinExpr nominal_obj_;
  std::unique_ptr<MilpSolver> solver_;
};

NominalResult solve_nominal(const MpcProblem& prob, const SpecSet& specs,
                            const SolverConfig& cfg = {});

RelaxationResult restore_feasibility(const MpcProblem& prob,
                                     const SpecSet& specs,
                                     const SolverConfig& cfg = {});

// Same, but over an existing encoding (stage-2 entry point).
NominalResult solve_nominal(MpcMilp& enc);
RelaxationResult restore_feasibility(MpcMilp& enc);

}  // namespace stlmpc
